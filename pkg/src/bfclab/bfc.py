"""Assembled computation codes: a stochastic encoder per message (uniform over
a family member's codewords) and one decoding set per Boolean function, with
exact and Monte-Carlo evaluation of the two error types, output-flip
complementation, and conversion to an identification code.

Decoding sets are never materialized over the output space.  Each set is a
boolean mask over decoder outcomes {0..M-1} plus the erasure bucket M, and
membership of an output word is decided through the decoder function, which
keeps exact evaluation linear in the number of output words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._stats import cp_interval_array
from .boolfn import BooleanFunction, flip as flip_fn
from .channel import DEFAULT_ENUM_CAP, Channel, sample_outputs
from .inner import TransmissionCode, decoder_statistics, output_space_size
from .setfamily import SetFamily
from . import _kernels

_BOUND_SLACK = 1e-12  # absolute float slack when checking proved inequalities


@dataclass(frozen=True)
class BfcCode:
    m: int
    inner: TransmissionCode
    family: SetFamily
    functions: tuple[BooleanFunction, ...]
    decoder_masks: np.ndarray = field(repr=False)  # (J, M+1) bool, erasure last
    lambda_family: float | None
    s_max: int

    @property
    def n_messages(self) -> int:
        return 1 << self.m

    @property
    def lambda_eff(self) -> float:
        """(intersection cap + 1) / member size: the tightest ratio the family
        is known to respect strictly."""
        return (self.family.intersection_cap + 1) / self.family.member_size

    def message_members(self) -> list[np.ndarray]:
        """Codeword index sets A_i for messages i = 0..2^m-1 (construction order)."""
        return [self.family.member_indices(i) for i in range(self.n_messages)]


def assemble_bfc(
    inner: TransmissionCode, family: SetFamily, functions
) -> BfcCode:
    """Wire an inner code, a set family over its codeword indices, and a list
    of equal-arity Boolean functions into a computation code.

    Message i gets the i-th family member (the first 2^m members in build
    order); the decoding set for function j covers the decoding regions of
    every codeword appearing in some member assigned to a preimage-of-1
    message.
    """
    functions = tuple(functions)
    if not functions:
        raise ValueError("need at least one function")
    m = functions[0].m
    if any(f.m != m for f in functions):
        raise ValueError("arity mismatch: functions must share m")
    if family.ground_size != inner.size:
        raise ValueError(
            f"size mismatch: family ground {family.ground_size} != "
            f"codeword count {inner.size}"
        )
    if (1 << m) > family.size:
        raise ValueError(
            f"size mismatch: need 2^m = {1 << m} family members, have {family.size}"
        )
    M = inner.size
    members = [family.member_indices(i) for i in range(1 << m)]
    masks = np.zeros((len(functions), M + 1), dtype=bool)
    for j, f in enumerate(functions):
        for msg in f.preimage_of_one():
            masks[j, members[msg]] = True
    masks.setflags(write=False)
    return BfcCode(
        m=m,
        inner=inner,
        family=family,
        functions=functions,
        decoder_masks=masks,
        lambda_family=family.lam,
        s_max=max(f.weight for f in functions),
    )


def complement_code(bfc: BfcCode) -> BfcCode:
    """Flip every function and complement every decoding set (erasure bucket
    included); encoders are untouched.  Exact error evaluation of the result
    swaps the two error types of the original."""
    masks = ~bfc.decoder_masks
    masks.setflags(write=False)
    flipped = tuple(flip_fn(f) for f in bfc.functions)
    return BfcCode(
        m=bfc.m,
        inner=bfc.inner,
        family=bfc.family,
        functions=flipped,
        decoder_masks=masks,
        lambda_family=bfc.lambda_family,
        s_max=max(f.weight for f in flipped),
    )


@dataclass(frozen=True)
class ErrorReport:
    method: str
    lambda1_max: float | None
    lambda2_max: float | None
    lambda1_applicable: bool
    lambda2_applicable: bool
    per_pair_lambda1: np.ndarray = field(repr=False)  # (2^m, J), NaN where f_j(i) != 1
    per_pair_lambda2: np.ndarray = field(repr=False)  # (2^m, J), NaN where f_j(i) != 0
    trials: int | None = None
    cp_lambda1: np.ndarray | None = field(default=None, repr=False)  # (2^m, J, 2)
    cp_lambda2: np.ndarray | None = field(default=None, repr=False)

    def pair_rows(self):
        """Long-form rows (i, j, error_type, value, cp_low, cp_high)."""
        rows = []
        n_msg, J = self.per_pair_lambda1.shape
        for i in range(n_msg):
            for j in range(J):
                for kind, mat, cp in (
                    ("lambda1", self.per_pair_lambda1, self.cp_lambda1),
                    ("lambda2", self.per_pair_lambda2, self.cp_lambda2),
                ):
                    v = mat[i, j]
                    if math.isnan(v):
                        continue
                    lo, hi = ("", "") if cp is None else (cp[i, j, 0], cp[i, j, 1])
                    rows.append((i, j, kind, v, lo, hi))
        return rows

    def to_json_dict(self) -> dict:
        def clean(mat):
            return [
                [None if math.isnan(v) else v for v in row] for row in mat.tolist()
            ]

        d = {
            "method": self.method,
            "lambda1_max": self.lambda1_max,
            "lambda2_max": self.lambda2_max,
            "lambda1_applicable": self.lambda1_applicable,
            "lambda2_applicable": self.lambda2_applicable,
            "per_pair_lambda1": clean(self.per_pair_lambda1),
            "per_pair_lambda2": clean(self.per_pair_lambda2),
        }
        if self.trials is not None:
            d["trials"] = self.trials
        return d


def _mask_sums(R: np.ndarray, masks: np.ndarray):
    """Per-codeword mass inside and outside each decoding set.

    Both halves are summed directly from the enumerated statistics rather than
    via 1 - x, so each is an honest subset sum.
    """
    M = R.shape[0]
    J = masks.shape[0]
    inside = np.empty((M, J))
    outside = np.empty((M, J))
    for j in range(J):
        inside[:, j] = R[:, masks[j]].sum(axis=1)
        outside[:, j] = R[:, ~masks[j]].sum(axis=1)
    return inside, outside


def _nan_max(mat: np.ndarray):
    if np.all(np.isnan(mat)):
        return None, False
    return float(np.nanmax(mat)), True


def eval_errors(
    bfc: BfcCode,
    channel: Channel,
    mode: str = "exact",
    trials: int = 100_000,
    seed: int = 0,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> ErrorReport:
    """Worst-case false-negative (lambda1) and false-positive (lambda2) errors
    over all (message, function) pairs.

    Pairs outside a quantifier's range are NaN in the per-pair matrices, and an
    error type with no applicable pair at all reports None rather than 0.
    Monte-Carlo mode draws `trials` samples per message, reused across
    functions, and attaches 99% Clopper-Pearson intervals per pair.
    """
    n_msg, J = bfc.n_messages, len(bfc.functions)
    members = bfc.message_members()
    f_of_i = np.array(
        [[f[i] for f in bfc.functions] for i in range(n_msg)], dtype=np.uint8
    )
    lam1 = np.full((n_msg, J), np.nan)
    lam2 = np.full((n_msg, J), np.nan)

    if mode == "exact":
        R, _ = decoder_statistics(bfc.inner, channel, enum_cap)
        inside, outside = _mask_sums(R, bfc.decoder_masks)
        for i in range(n_msg):
            qw_in = inside[members[i]].mean(axis=0)
            qw_out = outside[members[i]].mean(axis=0)
            one = f_of_i[i] == 1
            lam1[i, one] = qw_out[one]
            lam2[i, ~one] = qw_in[~one]
        l1, ok1 = _nan_max(lam1)
        l2, ok2 = _nan_max(lam2)
        return ErrorReport("exact", l1, l2, ok1, ok2, lam1, lam2)

    if mode != "monte_carlo":
        raise ValueError("mode must be 'exact' or 'monte_carlo'")
    if trials < 1:
        raise ValueError("monte_carlo mode needs trials >= 1")

    table = None
    if (
        isinstance(bfc.inner.decoder, str)
        and output_space_size(channel, bfc.inner.n) <= enum_cap
    ):
        _, table = decoder_statistics(bfc.inner, channel, enum_cap)
    elif not isinstance(bfc.inner.decoder, str):
        table = np.asarray(bfc.inner.decoder)
    pow_vec = _kernels._digit_weights(bfc.inner.n, channel.output_size)

    fail1 = np.full((n_msg, J), -1, dtype=np.int64)
    fail2 = np.full((n_msg, J), -1, dtype=np.int64)
    M = bfc.inner.size
    for i in range(n_msg):
        rng = np.random.default_rng(np.random.SeedSequence((seed, i)))
        ks = members[i][rng.integers(0, members[i].size, trials)]
        y = sample_outputs(channel, bfc.inner.codewords[ks], rng)
        if table is not None:
            d = table[y @ pow_vec]
        else:
            d = _kernels.decode_words(channel.transition, bfc.inner.codewords, y)
        counts = np.bincount(d, minlength=M + 1)
        hits = bfc.decoder_masks @ counts  # (J,)
        one = f_of_i[i] == 1
        fail1[i, one] = trials - hits[one]
        fail2[i, ~one] = hits[~one]
        lam1[i, one] = fail1[i, one] / trials
        lam2[i, ~one] = fail2[i, ~one] / trials
    cp1 = cp_interval_array(fail1, trials)
    cp2 = cp_interval_array(fail2, trials)
    l1, ok1 = _nan_max(lam1)
    l2, ok2 = _nan_max(lam2)
    return ErrorReport("monte_carlo", l1, l2, ok1, ok2, lam1, lam2, trials, cp1, cp2)


def proved_error_bounds(bfc: BfcCode, delta: float) -> tuple[float, float]:
    """The proved ceilings for the two error types: delta for false negatives
    and S_max * lambda_eff + delta for false positives."""
    return delta, bfc.s_max * bfc.lambda_eff + delta


def check_error_bounds(bfc: BfcCode, report: ErrorReport, delta: float) -> dict:
    b1, b2 = proved_error_bounds(bfc, delta)
    out = {"bound_lambda1": b1, "bound_lambda2": b2}
    out["lambda1_within_bound"] = (
        report.lambda1_max is None or report.lambda1_max <= b1 + _BOUND_SLACK
    )
    out["lambda2_within_bound"] = (
        report.lambda2_max is None or report.lambda2_max <= b2 + _BOUND_SLACK
    )
    return out


# ---------------------------------------------------------------------------
# Conversion to an identification code
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdCode:
    source: BfcCode
    weights: np.ndarray = field(repr=False)  # (J, M) mixture over codewords
    masks: np.ndarray = field(repr=False)  # decoding sets shared with the source
    s: int
    alpha: float  # computed preimage-overlap ratio
    alpha_requested: float | None

    @property
    def n_encoders(self) -> int:
        return int(self.weights.shape[0])


def preimage_overlap(functions) -> float:
    """max over distinct pairs of |preimage intersection| / weight."""
    tables = np.stack([f.table.astype(np.int64) for f in functions])
    inter = tables @ tables.T
    S = functions[0].weight
    J = len(functions)
    worst = 0
    for a in range(J):
        for b in range(a + 1, J):
            worst = max(worst, int(inter[a, b]))
    return worst / S


def to_id_code(bfc: BfcCode, alpha: float | None = None) -> IdCode:
    """Mixture encoders over each function's preimage turn the computation
    code into an identification code with guarantees misid <= lambda1 and
    wrong-id <= alpha + lambda2.

    Requires a constant-weight function set with weight >= 1.  The overlap
    ratio alpha is computed from the functions; a supplied alpha is only a cap
    the computed value must respect.
    """
    weights = {f.weight for f in bfc.functions}
    if len(weights) != 1:
        raise ValueError("functions must have equal weight")
    S = weights.pop()
    if S < 1:
        raise ValueError("function weight must be >= 1")
    computed = preimage_overlap(bfc.functions) if len(bfc.functions) > 1 else 0.0
    if alpha is not None and computed > alpha + _BOUND_SLACK:
        raise ValueError(
            f"computed preimage overlap {computed} exceeds requested alpha {alpha}"
        )
    members = bfc.message_members()
    M = bfc.inner.size
    mp = bfc.family.member_size
    J = len(bfc.functions)
    w = np.zeros((J, M))
    for j, f in enumerate(bfc.functions):
        counts = np.zeros(M, dtype=np.int64)
        for msg in f.preimage_of_one():
            counts[members[msg]] += 1
        w[j] = counts / (S * mp)
    w.setflags(write=False)
    return IdCode(bfc, w, bfc.decoder_masks, S, computed, alpha)


@dataclass(frozen=True)
class IdErrorReport:
    method: str
    misid_max: float
    wrongid_max: float | None
    per_encoder_misid: np.ndarray = field(repr=False)  # (J,)
    per_pair_wrongid: np.ndarray = field(repr=False)  # (J, J), NaN diagonal
    guarantee_misid: float | None = None
    guarantee_wrongid: float | None = None
    misid_within_guarantee: bool | None = None
    wrongid_within_guarantee: bool | None = None
    trials: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "misid_max": self.misid_max,
            "wrongid_max": self.wrongid_max,
            "per_encoder_misid": self.per_encoder_misid.tolist(),
            "guarantee_misid": self.guarantee_misid,
            "guarantee_wrongid": self.guarantee_wrongid,
            "misid_within_guarantee": self.misid_within_guarantee,
            "wrongid_within_guarantee": self.wrongid_within_guarantee,
            "trials": self.trials,
        }


def eval_id_errors(
    idcode: IdCode,
    channel: Channel,
    mode: str = "exact",
    trials: int = 100_000,
    seed: int = 0,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> IdErrorReport:
    """Misidentification (own decoding set missed) and wrong identification
    (another encoder landing in a foreign set); exact mode also verifies the
    recorded guarantees against an exact evaluation of the source code."""
    J = idcode.n_encoders
    M = idcode.source.inner.size
    misid = np.empty(J)
    wrong = np.full((J, J), np.nan)

    if mode == "exact":
        R, _ = decoder_statistics(idcode.source.inner, channel, enum_cap)
        inside, outside = _mask_sums(R, idcode.masks)
        for j in range(J):
            misid[j] = float(idcode.weights[j] @ outside[:, j])
        for ell in range(J):
            for j in range(J):
                if ell != j:
                    wrong[ell, j] = float(idcode.weights[ell] @ inside[:, j])
        wmax, wok = _nan_max(wrong)
        src = eval_errors(idcode.source, channel, "exact", enum_cap=enum_cap)
        g1 = src.lambda1_max if src.lambda1_applicable else 0.0
        g2 = idcode.alpha + (src.lambda2_max if src.lambda2_applicable else 0.0)
        return IdErrorReport(
            "exact",
            float(misid.max()),
            wmax,
            misid,
            wrong,
            guarantee_misid=g1,
            guarantee_wrongid=g2,
            misid_within_guarantee=bool(misid.max() <= g1 + _BOUND_SLACK),
            wrongid_within_guarantee=(
                None if wmax is None else bool(wmax <= g2 + _BOUND_SLACK)
            ),
        )

    if mode != "monte_carlo":
        raise ValueError("mode must be 'exact' or 'monte_carlo'")
    table = None
    inner = idcode.source.inner
    if isinstance(inner.decoder, str) and output_space_size(channel, inner.n) <= enum_cap:
        _, table = decoder_statistics(inner, channel, enum_cap)
    elif not isinstance(inner.decoder, str):
        table = np.asarray(inner.decoder)
    pow_vec = _kernels._digit_weights(inner.n, channel.output_size)
    for ell in range(J):
        rng = np.random.default_rng(np.random.SeedSequence((seed, ell)))
        ks = rng.choice(M, size=trials, p=idcode.weights[ell])
        y = sample_outputs(channel, inner.codewords[ks], rng)
        if table is not None:
            d = table[y @ pow_vec]
        else:
            d = _kernels.decode_words(channel.transition, inner.codewords, y)
        counts = np.bincount(d, minlength=M + 1)
        misid[ell] = (trials - int(counts[idcode.masks[ell]].sum())) / trials
        for j in range(J):
            if j != ell:
                wrong[ell, j] = int(counts[idcode.masks[j]].sum()) / trials
    wmax, _ = _nan_max(wrong)
    return IdErrorReport(
        "monte_carlo", float(misid.max()), wmax, misid, wrong, trials=trials
    )
