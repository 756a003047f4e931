"""Closed-form equilibria of the two-user multi-carrier power game.

The sequential game is solved by case analysis on the two users' best
carriers.  When they differ, each user simply tunes to ``gamma_star`` on
his own best carrier.  When they coincide, the leader weighs four options
on the contested carrier ``B``:

* share it at SINR ``beta_star`` while the follower stays (share value),
* raise power just enough to push the follower off (deter value),
* fall back to his second-best carrier at ``gamma_star`` (retreat value),
* shrink power toward zero, which approaches a supremum that is attained
  only in the limit (vanish value); when this supremum strictly beats the
  other three there is no exact equilibrium and an epsilon-equilibrium is
  returned instead.

The simultaneous-move solver classifies outcomes by the shared-carrier
gain condition (both users' best gain at least ``1 + gamma_star`` times
their second best on a common best carrier) and otherwise orthogonalizes.

All utilities stored on outcomes are recomputed from the final powers via
:mod:`specgame.game`; the candidate values are kept alongside as
diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import game
from .channel import ChannelMatrix, best_two_carriers
from .errors import PreconditionError, SolverFailure
from .efficiency import solve_beta_star
from .game import GameInstance, PowerAllocation, single_carrier_allocation

STACKELBERG_EXACT = "StackelbergExact"
STACKELBERG_EPSILON = "StackelbergEpsilon"
NASH_EXACT = "NashExact"
NASH_SHARED = "NashShared"
SOCIAL_OPTIMUM = "SocialOptimum"

_TIE_REL = 1e-12
_EPSILON_GRID_CAP = 400


@dataclass(frozen=True)
class LeaderCandidates:
    """The leader's candidate utilities on a contested best carrier.

    ``deterrence_sinr`` is the follower's gain gap ``(g_best - g_second) /
    g_second``: the lowest leader SINR on the contested carrier that makes
    the follower's reply move elsewhere.  ``share_sinr`` is the bounded
    shared-carrier root (absent for curves where sharing never pays).
    ``best_alone_value`` is the interference-free utility on the best
    carrier, a diagnostic upper reference for ``share_value``.
    """

    deterrence_sinr: float
    share_sinr: float | None
    share_value: float | None
    deter_value: float
    retreat_value: float
    vanish_value: float
    best_alone_value: float


@dataclass(frozen=True)
class UserOutcome:
    carrier: int
    power: float
    sinr: float
    utility: float


@dataclass(frozen=True, eq=False)
class EquilibriumOutcome:
    """One solved game: per-user actions and payoffs plus diagnostics."""

    kind: str
    users: tuple[UserOutcome, UserOutcome]
    orthogonalized: bool
    instance: GameInstance
    candidates: LeaderCandidates | None = None
    epsilon: float | None = None
    alpha: float | None = None
    divergent: bool = False
    notes: tuple[str, ...] = ()

    def allocation(self) -> PowerAllocation:
        return single_carrier_allocation(
            self.instance.K, [(u.carrier, u.power) for u in self.users]
        )

    @property
    def welfare(self) -> float:
        return self.users[0].utility + self.users[1].utility


def _outcome(inst, kind, carriers, powers, orthogonalized, **extra):
    """Assemble an outcome, recomputing SINRs and utilities from powers."""
    alloc = single_carrier_allocation(inst.K, zip(carriers, powers))
    users = tuple(
        UserOutcome(
            carrier=carriers[n],
            power=float(powers[n]),
            sinr=game.sinr(inst, alloc, n, carriers[n]),
            utility=game.utility(inst, alloc, n),
        )
        for n in (0, 1)
    )
    return EquilibriumOutcome(
        kind=kind,
        users=users,
        orthogonalized=orthogonalized,
        instance=inst,
        **extra,
    )


def follower_best_response(inst: GameInstance, leader_powers) -> np.ndarray:
    """The follower's reply to a fixed leader allocation.

    Picks the carrier with the highest effective gain (SINR per watt, with
    the leader's interference baked in) and tunes to ``gamma_star`` there.
    Effective gains within 1e-12 of the best are treated as tied; a tied
    carrier free of leader power wins, then the lowest index.
    """
    leader_powers = np.asarray(leader_powers, dtype=float)
    g = inst.channel.gains
    interfered = inst.sigma2 + g[0] * leader_powers
    eff = g[1] / interfered
    tied = eff >= eff.max() * (1.0 - _TIE_REL)
    free = tied & (leader_powers == 0.0)
    k = int(np.argmax(free)) if free.any() else int(np.argmax(tied))
    reply = np.zeros(inst.K)
    reply[k] = inst.efficiency.gamma_star * interfered[k] / g[1, k]
    return reply


def _ranked(inst):
    b1, s1 = best_two_carriers(inst.channel, 0)
    b2, s2 = best_two_carriers(inst.channel, 1)
    return b1, s1, b2, s2


def _leader_candidates(inst, b1, s1, b2, s2, solve_share=True):
    g = inst.channel.gains
    s2n = inst.sigma2
    f = inst.efficiency
    gs = f.gamma_star
    R1 = inst.rates[0]
    gamma_hat = (g[1, b2] - g[1, s2]) / g[1, s2]

    if gamma_hat > 0.0:
        deter = R1 * float(f.value(gamma_hat)) * g[0, b1] / (gamma_hat * s2n)
    else:
        deter = R1 * float(f.derivative(0.0)) * g[0, b1] / s2n  # gap-free limit
    retreat = R1 * float(f.value(gs)) * g[0, s1] / (gs * s2n)
    vanish = float(f.derivative(0.0)) * g[0, b1] * R1 / (s2n * (1.0 + gs))
    best_alone = R1 * float(f.value(gs)) * g[0, b1] / (gs * s2n)

    share_sinr = None
    share_value = None
    if solve_share and gamma_hat > gs:
        x_max = gamma_hat / (1.0 + gs * (1.0 + gamma_hat))
        share_sinr = solve_beta_star(f, x_max)
        if share_sinr is not None:
            one_minus = 1.0 - gs * share_sinr
            if one_minus < 1e-9:
                # near-singular sharing: rebuild the factor from logs
                one_minus = float(np.exp(np.log1p(-gs * share_sinr)))
            share_value = (
                R1 * float(f.value(share_sinr)) * one_minus * g[0, b1]
                / (share_sinr * s2n * (1.0 + gs))
            )
    return gamma_hat, LeaderCandidates(
        deterrence_sinr=gamma_hat,
        share_sinr=share_sinr,
        share_value=share_value,
        deter_value=deter,
        retreat_value=retreat,
        vanish_value=vanish,
        best_alone_value=best_alone,
    )


def stackelberg_solve(inst: GameInstance) -> EquilibriumOutcome:
    """Leader-first equilibrium; K >= 2 is guaranteed by the instance.

    Distinct best carriers: both users at ``gamma_star`` on their own best.
    Contested carrier with a small follower gap: leader takes it, follower
    falls back.  Otherwise the four candidate values are compared; on exact
    value ties the priority is deter > retreat > share (the outcome notes
    record the tie), and a strictly winning vanish value yields an
    epsilon-equilibrium with the default epsilon of 1e-6 times the
    supremum.
    """
    g = inst.channel.gains
    s2n = inst.sigma2
    gs = inst.efficiency.gamma_star
    b1, s1, b2, s2 = _ranked(inst)

    if b1 != b2:
        carriers = (b1, b2)
        powers = (gs * s2n / g[0, b1], gs * s2n / g[1, b2])
        return _outcome(inst, STACKELBERG_EXACT, carriers, powers, True)

    gamma_hat, cand = _leader_candidates(inst, b1, s1, b2, s2)

    if gamma_hat <= gs:
        carriers = (b1, s2)
        powers = (gs * s2n / g[0, b1], gs * s2n / g[1, s2])
        return _outcome(
            inst, STACKELBERG_EXACT, carriers, powers, True, candidates=cand
        )

    exact = [
        ("deter", cand.deter_value),
        ("retreat", cand.retreat_value),
    ]
    if cand.share_value is not None:
        exact.append(("share", cand.share_value))
    best_exact = max(v for _, v in exact)

    if cand.vanish_value > best_exact:
        return _epsilon_outcome(
            inst, b1, b2, cand, epsilon=1e-6 * cand.vanish_value,
            notes=("auto epsilon: vanishing-power supremum beats every exact option",),
        )

    notes = []
    if cand.share_value is None:
        notes.append("no shared-carrier root: compared deter and retreat only")
    winners = [name for name, v in exact if v == best_exact]
    if len(winners) > 1:
        notes.append("tie between candidate values: " + ", ".join(winners))
    winner = winners[0]  # list order encodes the tie priority

    if winner == "deter":
        carriers = (b1, s2)
        powers = (gamma_hat * s2n / g[0, b1], gs * s2n / g[1, s2])
        orthogonalized = True
    elif winner == "retreat":
        carriers = (s1, b2)
        powers = (gs * s2n / g[0, s1], gs * s2n / g[1, b2])
        orthogonalized = True
    else:
        bs = cand.share_sinr
        one_minus = 1.0 - gs * bs
        if one_minus < 1e-9:
            one_minus = float(np.exp(np.log1p(-gs * bs)))
        carriers = (b1, b2)
        powers = (
            bs * (1.0 + gs) * s2n / (g[0, b1] * one_minus),
            gs * (1.0 + bs) * s2n / (g[1, b2] * one_minus),
        )
        orthogonalized = False
    return _outcome(
        inst, STACKELBERG_EXACT, carriers, powers, orthogonalized,
        candidates=cand, notes=tuple(notes),
    )


def _epsilon_outcome(inst, b1, b2, cand, epsilon, notes=()):
    g = inst.channel.gains
    s2n = inst.sigma2
    gs = inst.efficiency.gamma_star
    target = cand.vanish_value - epsilon
    alpha = gs * s2n / g[0, b1]
    for _ in range(_EPSILON_GRID_CAP):
        follower_power = gs * (s2n + g[0, b1] * alpha) / g[1, b2]
        alloc = single_carrier_allocation(inst.K, [(b1, alpha), (b2, follower_power)])
        if game.utility(inst, alloc, 0) >= target:
            break
        alpha *= 0.5
    else:
        raise SolverFailure(
            "leader utility did not reach the vanishing-power target on the "
            f"geometric grid (epsilon={epsilon!r})"
        )
    return _outcome(
        inst, STACKELBERG_EPSILON, (b1, b2), (alpha, follower_power), False,
        candidates=cand, epsilon=epsilon, alpha=alpha, notes=tuple(notes),
    )


def epsilon_equilibrium(inst: GameInstance, epsilon: float) -> EquilibriumOutcome:
    """Near-equilibrium for games whose leader supremum is unattainable.

    The leader puts a small power ``alpha`` on the contested carrier, the
    largest value of the form ``2**-j * gamma_star * sigma2 / g`` keeping
    his utility within ``epsilon`` of the vanishing-power supremum; the
    follower replies on the same carrier at ``gamma_star`` over the induced
    interference.  Raises :class:`PreconditionError` unless the contested
    carrier exists, the follower's gap exceeds ``gamma_star``, and the
    supremum strictly beats the three exact candidate values.
    """
    if not epsilon > 0.0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon!r}")
    b1, s1, b2, s2 = _ranked(inst)
    if b1 != b2:
        raise PreconditionError("distinct best carriers: an exact equilibrium exists")
    gs = inst.efficiency.gamma_star
    gamma_hat, cand = _leader_candidates(inst, b1, s1, b2, s2)
    if gamma_hat <= gs:
        raise PreconditionError("follower gap below gamma_star: exact equilibrium exists")
    exact = [cand.deter_value, cand.retreat_value]
    if cand.share_value is not None:
        exact.append(cand.share_value)
    if not cand.vanish_value > max(exact):
        raise PreconditionError(
            "vanishing-power supremum does not dominate: exact equilibrium exists"
        )
    return _epsilon_outcome(inst, b1, b2, cand, epsilon)


def nash_solve(inst: GameInstance) -> EquilibriumOutcome:
    """Simultaneous-move equilibrium with a deterministic selection rule.

    Sharing happens exactly when both users' best carrier coincides and
    each has best gain >= (1 + gamma_star) times his second best.  The
    shared fixed point solves both one-shot response equations only for
    gamma_star < 1; past that it diverges, and the outcome keeps the
    carriers but reports infinite powers, zero utilities and the
    ``divergent`` flag.  Otherwise the game orthogonalizes: with distinct
    best carriers each user takes his own; on a contested carrier the user
    whose gain ratio is below the threshold yields to his second best, and
    when both are below, the smaller ratio yields (user 1 on an exact
    ratio tie).
    """
    g = inst.channel.gains
    s2n = inst.sigma2
    gs = inst.efficiency.gamma_star
    b1, s1, b2, s2 = _ranked(inst)

    if b1 != b2:
        carriers, powers = (b1, b2), (gs * s2n / g[0, b1], gs * s2n / g[1, b2])
        return _outcome(inst, NASH_EXACT, carriers, powers, True)

    r1 = g[0, b1] / g[0, s1]
    r2 = g[1, b2] / g[1, s2]
    threshold = 1.0 + gs

    if r1 >= threshold and r2 >= threshold:
        if gs < 1.0:
            p1, p2 = shared_nash_powers(gs, s2n, (g[0, b1], g[1, b2]))
            return _outcome(
                inst, NASH_SHARED, (b1, b2), (p1, p2), False
            )
        users = tuple(
            UserOutcome(carrier=(b1, b2)[n], power=np.inf, sinr=0.0, utility=0.0)
            for n in (0, 1)
        )
        return EquilibriumOutcome(
            kind=NASH_SHARED,
            users=users,
            orthogonalized=False,
            instance=inst,
            divergent=True,
            notes=("shared fixed point diverges for gamma_star >= 1",),
        )

    if r1 >= threshold > r2:
        user1_yields = False
    elif r2 >= threshold > r1:
        user1_yields = True
    else:
        user1_yields = r1 <= r2
    if user1_yields:
        carriers = (s1, b2)
        powers = (gs * s2n / g[0, s1], gs * s2n / g[1, b2])
    else:
        carriers = (b1, s2)
        powers = (gs * s2n / g[0, b1], gs * s2n / g[1, s2])
    return _outcome(inst, NASH_EXACT, carriers, powers, True)


def shared_nash_powers(gamma_star: float, sigma2: float, gains) -> tuple[float, float]:
    """Solve the two coupled response equations on one shared carrier.

    Each user wants SINR ``gamma_star`` over the other's interference:
    ``g_n p_n = gamma_star (sigma2 + g_m p_m)``, giving
    ``g_n p_n = gamma_star sigma2 / (1 - gamma_star)``.  Only meaningful
    for ``gamma_star < 1``.
    """
    if not gamma_star < 1.0:
        raise PreconditionError(
            f"shared fixed point requires gamma_star < 1, got {gamma_star!r}"
        )
    received = gamma_star * sigma2 / (1.0 - gamma_star)
    return received / float(gains[0]), received / float(gains[1])


def social_optimum(inst: GameInstance) -> EquilibriumOutcome:
    """Welfare-maximizing orthogonal assignment.

    Searches every ordered pair of distinct carriers with each user tuned
    to ``gamma_star`` on his own carrier; the welfare of pair (j, k) is
    proportional to ``R_1 g_1^j + R_2 g_2^k``.  Lexicographically first
    maximizer on ties.
    """
    g = inst.channel.gains
    s2n = inst.sigma2
    gs = inst.efficiency.gamma_star
    score = inst.rates[0] * g[0][:, None] + inst.rates[1] * g[1][None, :]
    np.fill_diagonal(score, -np.inf)
    j, k = np.unravel_index(int(np.argmax(score)), score.shape)
    carriers = (int(j), int(k))
    powers = (gs * s2n / g[0, j], gs * s2n / g[1, k])
    return _outcome(inst, SOCIAL_OPTIMUM, carriers, powers, True)


def swap_roles(inst: GameInstance) -> tuple[EquilibriumOutcome, EquilibriumOutcome]:
    """Solve the sequential game with user 1 leading, then following.

    The second outcome is remapped to the original user order, so
    ``users[0]`` is user 1 in both; its candidate diagnostics describe
    user 2 as the leader.
    """
    as_leader = stackelberg_solve(inst)
    mirrored = GameInstance(
        channel=ChannelMatrix(gains=inst.channel.gains[::-1]),
        sigma2=inst.sigma2,
        rates=inst.rates[::-1],
        efficiency=inst.efficiency,
    )
    raw = stackelberg_solve(mirrored)
    as_follower = EquilibriumOutcome(
        kind=raw.kind,
        users=raw.users[::-1],
        orthogonalized=raw.orthogonalized,
        instance=inst,
        candidates=raw.candidates,
        epsilon=raw.epsilon,
        alpha=raw.alpha,
        divergent=raw.divergent,
        notes=raw.notes + ("user 2 led this orientation",),
    )
    return as_leader, as_follower
