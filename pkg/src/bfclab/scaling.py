"""Parameter recipes and feasibility checks for the six achievability regimes,
matching converse ceilings, and summary-table emission.

Every bound is computed in log2 space; doubly-exponential quantities are never
materialized.  Throughout, `log n` means log base 2, consistent with rates in
bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .setfamily import _iceil, log2_binom

_LOG2E = math.log2(math.e)
_FLOAT_GUARD = 1000.0  # keep 2**x representable with margin

SCALING_TAGS = {
    1: "exponential",
    2: "exponential",
    3: "sub-exponential",
    4: "polynomial",
    5: "quasi-linear",
    6: "linear",
}

WEIGHT_CLASS_LABELS = {
    1: "S = c",
    2: "S = c*m^beta",
    3: "S = c*m^(log m)",
    4: "S = c*2^(m^(1/b))",
    5: "S = c*2^(m/log m)",
    6: "S = c*2^(gamma*m)",
}


@dataclass(frozen=True)
class ScalingCase:
    case_id: int
    c: float = 1.0
    beta: float | None = None
    b: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.case_id not in range(1, 7):
            raise ValueError("case_id must be 1..6")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.case_id == 1 and self.c != int(self.c):
            raise ValueError("case 1: c must be a positive integer weight")
        if self.case_id == 2 and not (self.beta is not None and self.beta > 0):
            raise ValueError("case 2: beta must be positive")
        if self.case_id == 4 and not (self.b is not None and self.b > 1):
            raise ValueError("case 4: b must exceed 1")
        if self.case_id == 6 and not (
            self.gamma is not None and 0 < self.gamma <= 1
        ):
            raise ValueError("case 6: gamma must lie in (0, 1]")

    @property
    def scaling_fn(self) -> str:
        return {1: "exp", 2: "exp", 3: "exp_sqrt", 4: "poly", 5: "quasilinear", 6: "linear"}[
            self.case_id
        ]


@dataclass(frozen=True)
class ParameterPlan:
    case: ScalingCase
    n: int
    capacity: float  # capacity after any super-channel lift
    delta: float
    xi: float
    xi_prime: float
    log2_lambda: float
    log2_epsilon: float
    m_log2: float
    m: int | None  # materialized only when it fits exact integer range
    super_channel_copies: int | None = None
    predicted_lambda2_bound: float | None = None
    eps_ok: bool | None = None
    eq_m_ok: bool | None = None
    lambda_ok: bool | None = None
    log2_n_tilde: float | None = None

    @property
    def lambda_(self) -> float:
        return 2.0**self.log2_lambda

    @property
    def epsilon(self) -> float:
        return 2.0**self.log2_epsilon


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def _materialize_m(m_log2_raw: float) -> tuple[int | None, float]:
    """Ceil of 2**x, exact when it fits; otherwise keep the exponent only."""
    if m_log2_raw <= 52:
        m = max(1, _iceil(2.0**m_log2_raw))
        return m, math.log2(m)
    return None, m_log2_raw


def _log2_s_threshold(case: ScalingCase, m: int | None, m_log2: float) -> float:
    """log2 of the weight-class ceiling S at message length m."""
    lm = math.log2(m) if m is not None else m_log2
    mv = float(m) if m is not None else 2.0**m_log2
    k = case.case_id
    lc = math.log2(case.c)
    if k == 1:
        return lc
    if k == 2:
        return lc + case.beta * lm
    if k == 3:
        return lc + lm * lm
    if k == 4:
        return lc + mv ** (1.0 / case.b) if mv != math.inf else math.inf
    if k == 5:
        return lc + (mv / lm if lm > 0 else math.inf)
    return lc + case.gamma * mv


def plan_parameters(
    case: ScalingCase,
    n: int,
    capacity: float,
    delta: float,
    xi: float,
    xi_prime: float,
) -> ParameterPlan:
    """Choose lambda, epsilon and the message length m for one regime.

    Case 4 requires capacity above 3; smaller capacities are lifted through a
    super-channel of T = floor(3/C + 1) copies, and the returned plan is in
    super-channel units (n counts super-uses, capacity is C*T).
    """
    _require(n >= 1, "need n >= 1")
    _require(0 < delta < 0.5, "need delta in (0, 1/2)")
    _require(0 < xi < xi_prime, "need 0 < xi < xi_prime")
    _require(capacity > 0, "need positive capacity")
    C = capacity
    k = case.case_id
    copies = None

    if k == 4 and C <= 3:
        copies = math.floor(3.0 / C + 1.0)
        C = C * copies

    if k == 1:
        S = case.c
        _require(delta / S < 0.5, "case 1: need lambda = delta/S < 1/2")
        log2_lambda = math.log2(delta) - math.log2(S)
        log2_eps = min(-math.log2(7.0), -_log2_pow2_plus_1(2.0 * S / delta + 1.0))
        m, m_log2 = _materialize_m((C - xi_prime) * n)
    elif k == 2:
        log2_lambda = -case.beta * C * n / (1.0 + 2.0 * case.beta)
        log2_eps = log2_lambda - math.log2(4.0 * math.e)
        m, m_log2 = _materialize_m((C / (1.0 + 2.0 * case.beta) - xi_prime) * n)
    elif k == 3:
        _require(C / 2.0 > xi_prime, "case 3: need xi_prime < C/2")
        log2_lambda = -(C - xi) * n / 2.0 + math.sqrt(C * n / 2.0)
        log2_eps = -(C - xi) * n / 2.0
        m, m_log2 = _materialize_m(math.sqrt((C / 2.0 - xi_prime) * n))
    elif k == 4:
        dprime = C - 3.0
        _require(dprime > 0, "case 4: capacity after lift must exceed 3")
        _require(
            xi / 2.0 < xi_prime <= dprime / 3.0,
            "case 4: need xi_prime in (xi/2, (C-3)/3]",
        )
        log2_lambda = (case.b - 1.0) * math.log2(n) - (C / 3.0 - xi / 2.0) * n
        log2_eps = -(2.0 * C / 3.0 - xi / 2.0) * n
        dtilde = C / 3.0 - xi_prime
        m = _iceil(dtilde * n**case.b)
        m_log2 = math.log2(m)
    elif k == 5:
        _require(n >= 2, "case 5: need n >= 2 so that log n > 0")
        _require(C > xi_prime, "case 5: need xi_prime < C")
        log2_lambda = math.log2(n) + math.log2(math.log2(n)) - (C - xi) * n / 2.0
        log2_eps = -(C - xi) * n / 2.0
        m = _iceil((C - xi_prime) / 2.0 * n * math.log2(n))
        m_log2 = math.log2(m)
    else:  # case 6
        _require(C > xi_prime, "case 6: need xi_prime < C")
        # epsilon is the reciprocal of the inner-code size; the positive
        # exponent would exceed 1 and violate the epsilon window.
        log2_eps = -(C - xi) * n
        log2_lambda = -C * n
        m = _iceil((C - xi_prime) * n)
        m_log2 = math.log2(m)

    plan = ParameterPlan(
        case=case,
        n=n,
        capacity=C,
        delta=delta,
        xi=xi,
        xi_prime=xi_prime,
        log2_lambda=log2_lambda,
        log2_epsilon=log2_eps,
        m_log2=m_log2,
        m=m,
        super_channel_copies=copies,
    )
    ls = _log2_s_threshold(case, m, m_log2) + log2_lambda
    bound = (2.0**ls if ls < _FLOAT_GUARD else math.inf) + delta
    return replace(plan, predicted_lambda2_bound=bound)


def _log2_pow2_plus_1(a: float) -> float:
    """log2(2**a + 1) without overflow."""
    if a > 60:
        return a
    return math.log2(2.0**a + 1.0)


def log2_family_guarantee(log2_eps: float, log2_lambda: float, log2_M: float) -> float:
    """log2 of the guaranteed family size over a ground set of log2-size
    log2_M, with the planned epsilon and lambda."""
    t = log2_eps + log2_M  # log2 of epsilon * M
    if t <= 52:
        mp = max(1, _iceil(2.0**t))
        log2_mp = math.log2(mp)
        u = log2_lambda + log2_mp
        r = max(1, _iceil(2.0**u)) if u <= 52 else None
        if r is not None:
            lbin = (
                log2_binom(mp, r)
                if mp <= 10**15
                else _log2_binom_float(float(mp), float(r))
            )
            return -lbin - log2_mp + r * _log2_odds(log2_eps)
        r_f = 2.0**u
        return -_log2_binom_float(float(mp), r_f) - log2_mp + r_f * _log2_odds(log2_eps)
    log2_mp = t
    u = log2_lambda + log2_mp
    if u > _FLOAT_GUARD:
        raise ValueError("feasibility scan out of float range; reduce n")
    r_f = max(1.0, 2.0**u)
    mp_f = 2.0**log2_mp
    if mp_f == math.inf:
        raise ValueError("feasibility scan out of float range; reduce n")
    return -_log2_binom_float(mp_f, r_f) - log2_mp + r_f * _log2_odds(log2_eps)


def _log2_odds(log2_eps: float) -> float:
    """log2((1 - eps) / (2 eps))."""
    eps = 2.0**log2_eps
    return (math.log1p(-eps) * _LOG2E if eps < 1.0 else -math.inf) - 1.0 - log2_eps


def _log2_binom_float(n: float, k: float) -> float:
    if k <= 0 or k >= n:
        return 0.0
    k = min(k, n - k)
    if n <= 1e12:
        # lgamma differences cancel catastrophically once n*ln(n)*eps ~ 1,
        # so the direct form is reserved for moderate n
        return (
            math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)
        ) / math.log(2.0)
    x = k / n
    ent = -x * math.log(x) - (1.0 - x) * math.log1p(-x)
    return (n * ent - 0.5 * math.log(2.0 * math.pi * k * (1.0 - x))) / math.log(2.0)


def check_feasibility(
    plan: ParameterPlan, M: int | None = None, log2_M: float | None = None
) -> ParameterPlan:
    """Fill the three feasibility flags.

    eq_m_ok: the planned message count 2^m fits under the guaranteed family
    size.  eps_ok: epsilon sits in the window [1/M, 1/6).  lambda_ok: lambda
    lies in (0, 1/2).  M defaults to the idealized inner-code size
    2^(n(C - xi)).
    """
    if log2_M is None:
        log2_M = math.log2(M) if M is not None else (plan.capacity - plan.xi) * plan.n
    eps_ok = (plan.log2_epsilon >= -log2_M - 1e-12) and (
        plan.log2_epsilon < -math.log2(6.0)
    )
    lambda_ok = plan.log2_lambda < -1.0
    log2_nt = log2_family_guarantee(plan.log2_epsilon, plan.log2_lambda, log2_M)
    if plan.m is not None:
        eq_m_ok = plan.m <= log2_nt
    else:
        if plan.m_log2 > _FLOAT_GUARD:
            raise ValueError("feasibility scan out of float range; reduce n")
        eq_m_ok = 2.0**plan.m_log2 <= log2_nt
    return replace(
        plan,
        eps_ok=bool(eps_ok),
        eq_m_ok=bool(eq_m_ok),
        lambda_ok=bool(lambda_ok),
        log2_n_tilde=float(log2_nt),
    )


def plan_and_check(
    case: ScalingCase,
    n: int,
    capacity: float,
    delta: float,
    xi: float,
    xi_prime: float,
    M: int | None = None,
) -> ParameterPlan:
    return check_feasibility(
        plan_parameters(case, n, capacity, delta, xi, xi_prime), M=M
    )


def feasibility_transition(
    case: ScalingCase,
    capacity: float,
    delta: float,
    xi: float,
    xi_prime: float,
    n_max: int = 1024,
) -> tuple[int | None, list[tuple[int, bool]]]:
    """Scan n upward and report the first n where all three flags hold, plus
    the scanned (n, all_ok) trace."""
    n_start = 2 if case.case_id == 5 else 1
    trace = []
    n_star = None
    for n in range(n_start, n_max + 1):
        try:
            plan = plan_and_check(case, n, capacity, delta, xi, xi_prime)
        except ValueError:
            break  # doubly-exponential regimes leave float range; stop the scan
        ok = bool(plan.eps_ok and plan.eq_m_ok and plan.lambda_ok)
        trace.append((n, ok))
        if ok and n_star is None:
            n_star = n
    return n_star, trace


def case6_chain_holds(plan: ParameterPlan) -> bool:
    """The self-contained sufficiency test for the linear regime: the planned
    xi gap must clear (log2(1 - 2^(-(C-xi)n)) - log2(4) - 1) / n."""
    if plan.case.case_id != 6:
        raise ValueError("only meaningful for case 6 plans")
    C, xi, n = plan.capacity, plan.xi, plan.n
    eps = 2.0 ** (-(C - xi) * n)
    if eps >= 1.0:
        return False
    rhs = (math.log1p(-eps) * _LOG2E - 2.0 - 1.0) / n
    return (xi - plan.xi_prime) <= rhs


# ---------------------------------------------------------------------------
# Summary-table expressions (achievable and converse ceilings on m)
# ---------------------------------------------------------------------------


def id_count_ceiling_log2log2(n: float, C: float, delta: float) -> float:
    """log2(log2(.)) of the doubly-exponential ceiling on identification-code
    counts, n * (C + delta); consumed as an external formula, never re-derived
    here.  The case-1 converse ceiling on m is this quantity at delta = 0."""
    return n * (C + delta)


def achievable_m_log2(case: ScalingCase, n: float, C: float) -> float:
    k = case.case_id
    if k == 1:
        return C * n
    if k == 2:
        return C * n / (1.0 + 2.0 * case.beta)
    if k == 3:
        return math.sqrt(C * n / 2.0)
    if k == 4:
        return math.log2(C / 3.0) + case.b * math.log2(n)
    if k == 5:
        v = (C / 2.0) * n * math.log2(n)
        return math.log2(v) if v > 0 else -math.inf
    return math.log2(C * n)


def converse_bound_log2(case: ScalingCase, n: float, C: float) -> float:
    k = case.case_id
    if k == 1:
        return C * n
    if k == 2:
        return C * n / (1.0 + case.beta)
    if k == 3:
        return math.sqrt(C * n)
    if k == 4:
        return case.b * math.log2(C * n)
    if k == 5:
        v = C * n * math.log2(n)
        return math.log2(v) if v > 0 else -math.inf
    return math.log2(C * n / case.gamma)


def achievable_m(case: ScalingCase, n: float, C: float) -> float:
    """Achievable message length at blocklength n (summary-table expression)."""
    x = achievable_m_log2(case, n, C)
    return 2.0**x if x < _FLOAT_GUARD else math.inf


def converse_bound(case: ScalingCase, n: float, C: float) -> float:
    """Converse ceiling on the message length at blocklength n."""
    x = converse_bound_log2(case, n, C)
    return 2.0**x if x < _FLOAT_GUARD else math.inf


def ordering_threshold(case: ScalingCase, C: float, n_max: int = 10_000) -> int:
    """Smallest n0 with achievable <= converse for every scanned n >= n0."""
    last_violation = 0
    for n in range(1, n_max + 1):
        if achievable_m_log2(case, n, C) > converse_bound_log2(case, n, C) + 1e-12:
            last_violation = n
    return last_violation + 1


def default_cases() -> list[ScalingCase]:
    return [
        ScalingCase(1, c=1.0),
        ScalingCase(2, c=1.0, beta=1.0),
        ScalingCase(3, c=1.0),
        ScalingCase(4, c=1.0, b=2.0),
        ScalingCase(5, c=1.0),
        ScalingCase(6, c=1.0, gamma=1.0),
    ]


def emit_table(C: float, n_list, cases=None) -> list[dict]:
    """One row per (case, n): weight-class label, achievable and converse m
    (linear and log2), and the scaling-law tag."""
    cases = default_cases() if cases is None else list(cases)
    rows = []
    for case in cases:
        for n in n_list:
            rows.append(
                {
                    "case": case.case_id,
                    "weight_class": WEIGHT_CLASS_LABELS[case.case_id],
                    "scaling": SCALING_TAGS[case.case_id],
                    "n": n,
                    "achievable_m": achievable_m(case, n, C),
                    "converse_m": converse_bound(case, n, C),
                    "achievable_log2": achievable_m_log2(case, n, C),
                    "converse_log2": converse_bound_log2(case, n, C),
                }
            )
    return rows
