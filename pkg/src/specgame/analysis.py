"""Closed-form probabilities, efficiency bounds, and outcome classifiers.

Everything here reduces to one order-statistics quantity: for K i.i.d.
exponential gains, the probability that the largest is at least
``(1 + gamma_star)`` times the second largest is ``K * beta_term`` where

    beta_term(g, K) = (K-1)! / ((2+g) * (3+g) * ... * (K+g))
                    = (1+g) * B(1+g, K)        (B the Beta function)

computed by the stable telescoping product.  The sharing probabilities,
their decay rate, and the spectral-efficiency floors all follow from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import best_two_carriers
from .efficiency import solve_beta_star
from .equilibria import EquilibriumOutcome
from .errors import ConfigError
from .game import GameInstance

BOUND_KINDS = (
    "ProbNoOrthIID",
    "ProbNoOrthIdentical",
    "SEBoundIID",
    "SEBoundIdentical",
)

DISTINCT_BEST = "distinct_best"
SHARED_BOTH = "shared_both"
ROLE_SWAP = "role_swap"
OTHER = "other"


def _check_k(K):
    if not isinstance(K, (int, np.integer)) or isinstance(K, bool) or K < 1:
        raise ConfigError(f"K must be an integer >= 1, got {K!r}")


def beta_term(gamma_star: float, K: int) -> float:
    """(1 + gamma_star) * B(1 + gamma_star, K) via the telescoping product.

    Exact for integer K with no special-function dependency; the empty
    product at K = 1 is 1.
    """
    _check_k(K)
    if not gamma_star > 0.0:
        raise ConfigError(f"gamma_star must be positive, got {gamma_star!r}")
    j = np.arange(2, K + 1, dtype=float)
    return float(np.prod((j - 1.0) / (j + gamma_star)))


def p_no_orth_iid(gamma_star: float, K: int) -> float:
    """Reference curve for the two users sharing a carrier under i.i.d. gains.

    Computes ``T * ((K-1)/K + T)`` with ``T = beta_term(gamma_star, K)``;
    decays like ``K**-(1 + gamma_star)``.  This curve is an upper bound on
    the true probability of the shared-carrier gain condition; the exact
    value is :func:`p_gain_condition_iid` and the two agree only at K = 1.
    """
    t = beta_term(gamma_star, K)
    return t * ((K - 1) / K + t)


def p_gain_condition_iid(gamma_star: float, K: int) -> float:
    """Exact probability of the shared-carrier gain condition, i.i.d. gains.

    The condition: both users' best carrier coincides and each user's best
    gain is at least ``(1 + gamma_star)`` times his second best.  Per user
    the ratio event has probability ``K * beta_term`` and is independent of
    where the argmax falls; the two users are independent and the argmaxes
    agree with probability 1/K, giving ``K * beta_term**2``.
    """
    t = beta_term(gamma_star, K)
    return K * t * t


def p_no_orth_identical(gamma_star: float, K: int) -> float:
    """Sharing probability when both users see identical gains.

    ``K * beta_term``, clamped to 1 (the raw expression reaches 1 at
    K = 1); exactly K times the leading factor of :func:`p_no_orth_iid`.
    """
    return min(1.0, K * beta_term(gamma_star, K))


def se_bound(gamma_star: float, K: int, identical_users: bool = False) -> float:
    """Spectral-efficiency floor for the orthogonalized regime, bits/s/Hz.

    ``log2(1 + gamma_star)`` scaled down by the relevant sharing
    probability; tends to ``log2(1 + gamma_star)`` as K grows.
    """
    if identical_users:
        p = K * beta_term(gamma_star, K)
    else:
        p = p_no_orth_iid(gamma_star, K)
    return float(np.log2(1.0 + gamma_star) * (1.0 - p))


@dataclass(frozen=True)
class BoundCurve:
    """One analytic curve sampled over carrier counts."""

    kind: str
    K_values: tuple[int, ...]
    values: tuple[float, ...]


def bound_curve(gamma_star: float, K_values, kind: str) -> BoundCurve:
    if kind not in BOUND_KINDS:
        raise ConfigError(f"kind must be one of {BOUND_KINDS}, got {kind!r}")
    ks = tuple(int(k) for k in K_values)
    if not ks:
        raise ConfigError("K_values must be non-empty")
    if kind == "ProbNoOrthIID":
        vals = [p_no_orth_iid(gamma_star, k) for k in ks]
    elif kind == "ProbNoOrthIdentical":
        vals = [p_no_orth_identical(gamma_star, k) for k in ks]
    elif kind == "SEBoundIID":
        vals = [se_bound(gamma_star, k, identical_users=False) for k in ks]
    else:
        vals = [se_bound(gamma_star, k, identical_users=True) for k in ks]
    return BoundCurve(kind=kind, K_values=ks, values=tuple(vals))


def welfare_ratio_bounds(inst: GameInstance) -> tuple[float, float]:
    """Worst-case welfare ratios of the sequential equilibrium.

    Returns ``(vs_simultaneous, vs_optimum)``: how many times worse the
    sequential-game welfare can be than the simultaneous-move welfare and
    than the best attainable welfare.  Both are 1 when the users' best
    carriers differ (the equilibrium then IS the optimum).
    """
    g = inst.channel.gains
    b1, s1 = best_two_carriers(inst.channel, 0)
    b2, s2 = best_two_carriers(inst.channel, 1)
    if b1 != b2:
        return 1.0, 1.0
    r1, r2 = inst.rates
    top = r1 * g[0, b1] + r2 * g[1, b2]
    vs_nash = top / (r1 * g[0, b1] + r2 * g[1, s2])
    vs_optimum = top / (r1 * g[0, s1] + r2 * g[1, s2])
    return float(vs_nash), float(vs_optimum)


def classify_outcome_pattern(
    inst: GameInstance, nash: EquilibriumOutcome, stack: EquilibriumOutcome
) -> str:
    """Classify how the two solution concepts relate on one instance.

    ``distinct_best``: the users' best carriers differ (both games agree).
    ``shared_both``: both games put both users on the common best carrier.
    ``role_swap``: on a contested carrier, the leader holds it in the
    sequential game but cedes it in the simultaneous game, with the other
    user doing the opposite.  ``other``: any remaining combination.
    """
    if nash.instance is not inst or stack.instance is not inst:
        raise ConfigError("outcomes must come from the given instance")
    b1, s1 = best_two_carriers(inst.channel, 0)
    b2, s2 = best_two_carriers(inst.channel, 1)
    if b1 != b2:
        return DISTINCT_BEST
    n1, n2 = (u.carrier for u in nash.users)
    t1, t2 = (u.carrier for u in stack.users)
    if (n1, n2) == (b1, b1) and (t1, t2) == (b1, b1):
        return SHARED_BOTH
    if (t1, t2) == (b1, s2) and (n1, n2) == (s1, b2):
        return ROLE_SWAP
    return OTHER


def role_advantage_conditions(inst: GameInstance) -> frozenset[int]:
    """Sufficient conditions under which leading beats following for user 1.

    Evaluates six closed-form tests; if any holds and both role
    orientations admit exact equilibria, user 1's utility as the leader is
    at least his utility as the follower.  Conditions 3..6 involve the
    shared-carrier root over its natural domain and report unsatisfied
    when that root does not exist.  Returns the satisfied condition
    numbers.
    """
    g = inst.channel.gains
    f = inst.efficiency
    gs = f.gamma_star
    b1, s1 = best_two_carriers(inst.channel, 0)
    b2, s2 = best_two_carriers(inst.channel, 1)

    satisfied = set()
    if b1 != b2:
        satisfied.add(1)
        return frozenset(satisfied)

    r1 = g[0, b1] / g[0, s1]
    r2 = g[1, b2] / g[1, s2]
    if min(r1, r2) <= 1.0 + gs:
        satisfied.add(2)

    bs = solve_beta_star(f, x_max=min(gs, 1.0 / gs))
    if bs is None:
        return frozenset(satisfied)

    def gap_rate(ratio):
        d = ratio - 1.0
        if d <= 0.0:
            return float(f.derivative(0.0))
        return float(f.value(d)) / d

    a1, a2 = gap_rate(r1), gap_rate(r2)
    e1 = float(f.value(gs)) * g[0, s1] / (gs * g[0, b1])
    e2 = float(f.value(gs)) * g[1, s2] / (gs * g[1, b2])
    share_rate = float(f.value(bs)) * (1.0 - gs * bs) / (bs * (1.0 + gs))
    share_rate_peak = float(f.value(gs)) * (1.0 - gs * bs) / (gs * (1.0 + gs))

    if a1 >= max(e2, share_rate) and a2 >= max(e1, share_rate):
        satisfied.add(3)
    if share_rate >= max(e1, a2) and a1 >= max(e2, share_rate):
        satisfied.add(4)
    if (
        e1 >= max(a2, share_rate)
        and share_rate >= max(e2, a1)
        and r1 <= (1.0 + bs) / (1.0 - gs * bs)
    ):
        satisfied.add(5)
    if a2 >= max(e1, share_rate_peak) and share_rate >= max(e2, a1):
        satisfied.add(6)
    return frozenset(satisfied)
