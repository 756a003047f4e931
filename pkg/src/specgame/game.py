"""Game instances, SINR and utility evaluation, and the grid-search oracle.

The two users transmit over K shared carriers.  On carrier k, user n's
SINR is ``g_n^k p_n^k / (sigma2 + g_m^k p_m^k)`` with m the other user, and
the utility is goodput per watt:

    u_n = R_n * sum_k f(sinr_n^k) / sum_k p_n^k     [bits/Joule]

``brute_force_best_response`` is deliberately independent of every closed
form in :mod:`specgame.equilibria`; it exists to validate them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelMatrix
from .efficiency import EfficiencyModel
from .errors import ConfigError

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class GameInstance:
    """Immutable problem data: channel, noise power, rates, efficiency curve."""

    channel: ChannelMatrix
    sigma2: float
    rates: tuple[float, float]
    efficiency: EfficiencyModel

    def __post_init__(self):
        if not self.sigma2 > 0.0:
            raise ConfigError(f"sigma2 must be positive, got {self.sigma2!r}")
        r = tuple(float(x) for x in self.rates)
        if len(r) != 2 or not all(x > 0.0 for x in r):
            raise ConfigError(f"rates must be two positive reals, got {self.rates!r}")
        object.__setattr__(self, "rates", r)

    @property
    def K(self) -> int:
        return self.channel.K


@dataclass(frozen=True, eq=False)
class PowerAllocation:
    """Transmit powers, one row per user, one column per carrier."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != 2:
            raise ConfigError(f"powers must have shape (2, K), got {p.shape}")
        if np.any(np.isnan(p)) or np.any(p < 0.0):
            raise ConfigError("powers must be nonnegative")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


def single_carrier_allocation(K: int, entries) -> PowerAllocation:
    """Build a (2, K) allocation from per-user ``(carrier, power)`` pairs."""
    p = np.zeros((2, K))
    for user, (carrier, power) in enumerate(entries):
        p[user, carrier] = power
    return PowerAllocation(p=p)


def effective_gain(inst: GameInstance, alloc: PowerAllocation, user: int, carrier: int) -> float:
    """SINR per watt on the carrier: g / (sigma2 + rival received power)."""
    other = 1 - user
    g = inst.channel.gains
    return float(g[user, carrier] / (inst.sigma2 + g[other, carrier] * alloc.p[other, carrier]))


def sinr(inst: GameInstance, alloc: PowerAllocation, user: int, carrier: int) -> float:
    return effective_gain(inst, alloc, user, carrier) * float(alloc.p[user, carrier])


def sinr_matrix(inst: GameInstance, alloc: PowerAllocation) -> np.ndarray:
    g = inst.channel.gains
    received = g * alloc.p
    return received / (inst.sigma2 + received[::-1])


def utility(inst: GameInstance, alloc: PowerAllocation, user: int) -> float:
    """Goodput per watt; 0 by convention when the user is silent.

    The all-zero-power value of the defining ratio is 0/0; 0 is the limit
    along vanishing power whenever f'(0) = 0 and a floor otherwise, and the
    positive-slope case is treated explicitly by the equilibrium layer, so
    the convention never leaks into results.
    """
    total = float(alloc.p[user].sum())
    if total == 0.0:
        return 0.0
    rates = inst.efficiency.value(sinr_matrix(inst, alloc)[user])
    return inst.rates[user] * float(np.sum(rates)) / total


def utilities(inst: GameInstance, alloc: PowerAllocation) -> tuple[float, float]:
    return utility(inst, alloc, 0), utility(inst, alloc, 1)


def _golden_max(fn, lo, hi, iters=80):
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def brute_force_best_response(
    inst: GameInstance,
    opponent_powers,
    user: int,
    n_grid: int = 1200,
    span: float = 1e4,
) -> PowerAllocation:
    """Best single-carrier reply found by grid search plus refinement.

    Scans every carrier with ``n_grid`` log-spaced powers covering
    ``span`` on either side of that carrier's natural power scale (the
    scale only sets the window; the argmax inside it is free), widens the
    window whenever the optimum lands on an edge, and polishes the best
    point with golden-section search.  Single-carrier replies are
    exhaustive here: splitting power over several carriers never beats
    the best single carrier for these utilities.  Ties across carriers
    resolve to the lower index.
    """
    if n_grid < 1000:
        raise ConfigError(f"n_grid must be >= 1000, got {n_grid}")
    opponent_powers = np.asarray(opponent_powers, dtype=float)
    g = inst.channel.gains
    other = 1 - user
    eff = g[user] / (inst.sigma2 + g[other] * opponent_powers)
    gs = inst.efficiency.gamma_star

    f = inst.efficiency.value
    R = inst.rates[user]

    def rate_on(k):
        h = eff[k]
        return lambda p: R * float(f(h * p)) / p

    for _ in range(10):
        best = (-np.inf, 0, 0)
        grids = []
        for k in range(inst.K):
            center = gs / eff[k]
            grid = np.geomspace(center / span, center * span, n_grid)
            grids.append(grid)
            vals = R * f(eff[k] * grid) / grid
            i = int(np.argmax(vals))
            if vals[i] > best[0]:
                best = (float(vals[i]), k, i)
        _, k, i = best
        if 0 < i < n_grid - 1:
            break
        span *= 100.0  # optimum on the window edge: widen and rescan
    grid = grids[k]
    lo = grid[i - 1] if i > 0 else grid[i] / 2.0
    hi = grid[i + 1] if i < n_grid - 1 else grid[i] * 2.0
    p_best, _ = _golden_max(rate_on(k), lo, hi)
    if rate_on(k)(p_best) < best[0]:
        p_best = float(grid[i])
    p = np.zeros(inst.K)
    p[k] = p_best
    rows = [opponent_powers, p] if user == 1 else [p, opponent_powers]
    return PowerAllocation(p=np.vstack(rows))
