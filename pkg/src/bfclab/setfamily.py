"""Families of equal-size subsets with bounded pairwise intersections, and
constant-weight binary sequences with bounded support overlap.

Members are stored as packed bit vectors (uint64 words, least-significant bit
is element 1).  Construction is greedy over a deterministic candidate stream:
a seeded permutation of the exhaustive enumeration when the candidate count is
below `cand_cap`, else seeded rejection sampling.  Only the exhaustive regime
carries a size guarantee, so only it hard-fails on a shortfall.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels

DEFAULT_CAND_CAP = 2**22
_SNAP = 1e-9


def _iceil(x: float) -> int:
    """Ceiling with snapping, so 0.15*20 = 3.0000000000000004 ceils to 3."""
    r = round(x)
    if abs(x - r) < _SNAP:
        return int(r)
    return math.ceil(x)


def log2_binom(n: int, k: int) -> float:
    """log2 of a binomial coefficient; exact integer arithmetic for small n."""
    if k < 0 or k > n:
        return -math.inf
    if k == 0 or k == n:
        return 0.0
    if n <= 2000:
        return math.log2(math.comb(n, k))
    return (
        math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    ) / math.log(2)


# ---------------------------------------------------------------------------
# Packed bit-vector helpers (LSB of word 0 = element 1).
# ---------------------------------------------------------------------------


def _n_words(universe: int) -> int:
    return (universe + 63) // 64


def pack_subsets(subsets, universe: int) -> np.ndarray:
    """Rows of element lists (1-based) to packed uint64 bit rows."""
    out = np.zeros((len(subsets), _n_words(universe)), dtype=np.uint64)
    for r, sub in enumerate(subsets):
        for e in sub:
            if not 1 <= e <= universe:
                raise ValueError(f"element {e} outside 1..{universe}")
            out[r, (e - 1) >> 6] |= np.uint64(1) << np.uint64((e - 1) & 63)
    return out


def unpack_member(bits_row: np.ndarray, universe: int) -> np.ndarray:
    """Packed row to sorted 0-based index array."""
    as_bytes = bits_row.view(np.uint8)
    flat = np.unpackbits(as_bytes, bitorder="little")[:universe]
    return np.flatnonzero(flat)


def member_sizes(bits: np.ndarray) -> np.ndarray:
    return np.bitwise_count(bits).sum(axis=1, dtype=np.int64)


def _hex_of_row(bits_row: np.ndarray) -> str:
    v = 0
    for i, w in enumerate(bits_row.tolist()):
        v |= int(w) << (64 * i)
    return format(v, "x")


def _row_of_hex(s: str, universe: int) -> np.ndarray:
    v = int(s, 16)
    row = np.zeros(_n_words(universe), dtype=np.uint64)
    for i in range(row.size):
        row[i] = (v >> (64 * i)) & 0xFFFFFFFFFFFFFFFF
    return row


@lru_cache(maxsize=32)
def _all_subsets_packed(universe: int, size: int) -> np.ndarray:
    """All size-subsets of {1..universe} in lexicographic element order."""
    n = math.comb(universe, size)
    idx = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(universe), size)),
        dtype=np.int64,
        count=n * size,
    ).reshape(n, size)
    bits = np.zeros((n, _n_words(universe)), dtype=np.uint64)
    rows = np.arange(n)
    for j in range(size):
        w = idx[:, j] >> 6
        np.bitwise_or.at(
            bits, (rows, w), np.left_shift(np.uint64(1), (idx[:, j] & 63).astype(np.uint64))
        )
    bits.setflags(write=False)
    return bits


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetFamily:
    ground_size: int
    member_size: int
    intersection_cap: int
    members: np.ndarray = field(repr=False)  # (N, n_words) uint64
    lam: float | None = None  # the lambda the family was built for, if known

    def __post_init__(self):
        m = np.array(self.members, dtype=np.uint64)
        m.setflags(write=False)
        object.__setattr__(self, "members", m)

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    def member_indices(self, i: int) -> np.ndarray:
        return unpack_member(self.members[i], self.ground_size)

    def to_json_dict(self) -> dict:
        return {
            "ground_size": self.ground_size,
            "member_size": self.member_size,
            "cap": self.intersection_cap,
            "members": [_hex_of_row(r) for r in self.members],
        }


@dataclass(frozen=True)
class ConstantWeightFamily:
    length: int
    weight: int
    overlap_cap: int
    members: np.ndarray = field(repr=False)
    alpha: float | None = None

    def __post_init__(self):
        m = np.array(self.members, dtype=np.uint64)
        m.setflags(write=False)
        object.__setattr__(self, "members", m)

    @property
    def size(self) -> int:
        return int(self.members.shape[0])

    def member_bits(self, i: int) -> np.ndarray:
        """Member i as a dense 0/1 vector of length T."""
        as_bytes = self.members[i].view(np.uint8)
        return np.unpackbits(as_bytes, bitorder="little")[: self.length].astype(np.uint8)

    def to_json_dict(self) -> dict:
        return {
            "length": self.length,
            "weight": self.weight,
            "cap": self.overlap_cap,
            "members": [_hex_of_row(r) for r in self.members],
        }


def load_family(path):
    with open(path) as fh:
        d = json.load(fh)
    if "ground_size" in d:
        u = d["ground_size"]
        members = np.array([_row_of_hex(s, u) for s in d["members"]], dtype=np.uint64)
        return SetFamily(u, d["member_size"], d["cap"], members)
    u = d["length"]
    members = np.array([_row_of_hex(s, u) for s in d["members"]], dtype=np.uint64)
    return ConstantWeightFamily(u, d["weight"], d["cap"], members)


def save_family(family, path) -> None:
    with open(path, "w") as fh:
        json.dump(family.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


def _check_family_inputs(ground_size: int, epsilon: float, lam: float) -> int:
    if ground_size <= 6:
        raise ValueError("hypothesis failed: need ground size > 6")
    if not 0.0 < lam < 0.5:
        raise ValueError("hypothesis failed: need 0 < lambda < 1/2")
    if not epsilon < 1.0 / 6.0:
        raise ValueError("hypothesis failed: need epsilon < 1/6")
    if epsilon * ground_size < 1.0 - _SNAP:
        raise ValueError("hypothesis failed: need epsilon * ground_size >= 1")
    return _iceil(epsilon * ground_size)


def family_size_guarantee_log2(ground_size: int, epsilon: float, lam: float) -> float:
    """log2 of the guaranteed family size for the greedy construction."""
    mp = _check_family_inputs(ground_size, epsilon, lam)
    r = _iceil(lam * mp)
    return (
        -log2_binom(mp, r)
        - math.log2(mp)
        + r * (math.log2(1.0 - epsilon) - math.log2(2.0 * epsilon))
    )


def family_size_guarantee(ground_size: int, epsilon: float, lam: float) -> float:
    """Guaranteed family size (a real number; exceed it by taking the ceiling)."""
    return 2.0 ** family_size_guarantee_log2(ground_size, epsilon, lam)


def gilbert_lower_bound(T: int, S: int, alpha: float) -> float:
    """log2 of the guaranteed constant-weight family size.

    A lower binomial index of 0 or below contributes log2(1) = 0; alpha = 1
    hits that boundary and is flagged with a warning rather than rejected.
    """
    if not 1 <= S <= T / 2:
        raise ValueError("need 1 <= S <= T/2")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("need alpha in (0, 1]")
    low = _iceil((1.0 - alpha) * S) - 1
    if low < 0:
        warnings.warn(
            "alpha = 1 puts the lower binomial index below zero; treating it as 0",
            stacklevel=2,
        )
    return log2_binom(T, S) - (log2_binom(T, low) if low > 0 else 0.0) - S


# ---------------------------------------------------------------------------
# Greedy builders
# ---------------------------------------------------------------------------


def _greedy_over_stream(bits, cap: int, target: int):
    return _kernels.greedy_select(bits, cap, target)


def _sampled_candidates(universe: int, size: int, count: int, rng) -> np.ndarray:
    subs = [sorted(rng.permutation(universe)[:size] + 1) for _ in range(count)]
    return pack_subsets(subs, universe)


def build_family_greedy(
    ground_size: int,
    epsilon: float,
    lam: float,
    target_count: int,
    seed: int,
    cand_cap: int = DEFAULT_CAND_CAP,
) -> SetFamily:
    """Greedy family with |A_i| = ceil(epsilon * ground) and pairwise
    intersections strictly below lambda * |A_i| (integer cap ceil(lam*M') - 1).

    Candidate order is a seeded permutation of the exhaustive enumeration when
    feasible; the guaranteed size is then min(target, ceil(lower bound)).
    """
    mp = _check_family_inputs(ground_size, epsilon, lam)
    cap = _iceil(lam * mp) - 1
    guaranteed = _iceil(family_size_guarantee(ground_size, epsilon, lam))
    n_cand = math.comb(ground_size, mp)
    rng = np.random.default_rng(seed)
    if n_cand <= cand_cap:
        bits = _all_subsets_packed(ground_size, mp)
        order = rng.permutation(n_cand)
        chosen = _greedy_over_stream(bits[order], cap, target_count)
        members = bits[order][chosen]
        if members.shape[0] < min(target_count, guaranteed):
            raise RuntimeError(
                "exhaustive greedy fell short of the guaranteed size "
                f"({members.shape[0]} < {guaranteed}); this indicates a bug"
            )
    else:
        batches = []
        accepted = np.zeros((0, _n_words(ground_size)), dtype=np.uint64)
        attempts = 0
        attempt_cap = max(100_000, 200 * target_count)
        while accepted.shape[0] < target_count and attempts < attempt_cap:
            batch = _sampled_candidates(
                ground_size, mp, min(4096, attempt_cap - attempts), rng
            )
            attempts += batch.shape[0]
            stream = np.concatenate([accepted, batch]) if accepted.size else batch
            chosen = _greedy_over_stream(stream, cap, target_count)
            accepted = stream[chosen]
            batches.append(batch)
        if accepted.shape[0] < target_count:
            raise RuntimeError(
                f"sampling regime exhausted {attempts} attempts at size "
                f"{accepted.shape[0]} < target {target_count}; no guarantee applies "
                "below the exhaustive candidate cap"
            )
        members = accepted
    return SetFamily(ground_size, mp, cap, members, lam=lam)


def gilbert_build(
    T: int,
    S: int,
    alpha: float,
    seed: int = 0,
    target_count: int | None = None,
    cand_cap: int = DEFAULT_CAND_CAP,
) -> ConstantWeightFamily:
    """Greedy constant-weight family at minimum distance 2d, d = ceil((1-a)S).

    Constant-weight pairs satisfy |a & b| = S - d_H(a,b)/2, so the distance
    rule is enforced as a support-intersection cap of S - d.  The exhaustive
    regime (lexicographic candidates) must reach the guaranteed size.
    """
    if not 1 <= S <= T / 2:
        raise ValueError("need 1 <= S <= T/2")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("need alpha in (0, 1]")
    d = _iceil((1.0 - alpha) * S)
    build_cap = S - d
    guaranteed = _iceil(2.0 ** gilbert_lower_bound(T, S, alpha))
    n_cand = math.comb(T, S)
    if n_cand <= cand_cap:
        bits = _all_subsets_packed(T, S)
        chosen = _greedy_over_stream(bits, build_cap, target_count or n_cand)
        members = bits[chosen]
        if target_count is None and members.shape[0] < guaranteed:
            raise RuntimeError(
                "exhaustive constant-weight greedy fell short of the bound "
                f"({members.shape[0]} < {guaranteed}); this indicates a bug"
            )
    else:
        rng = np.random.default_rng(seed)
        want = target_count or guaranteed
        accepted = np.zeros((0, _n_words(T)), dtype=np.uint64)
        attempts = 0
        attempt_cap = max(100_000, 200 * want)
        while accepted.shape[0] < want and attempts < attempt_cap:
            batch = _sampled_candidates(T, S, min(4096, attempt_cap - attempts), rng)
            attempts += batch.shape[0]
            stream = np.concatenate([accepted, batch]) if accepted.size else batch
            chosen = _greedy_over_stream(stream, build_cap, want)
            accepted = stream[chosen]
        members = accepted
    return ConstantWeightFamily(T, S, int(math.floor(alpha * S + _SNAP)), members, alpha=alpha)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyReport:
    ok: bool
    max_intersection: int | None
    violation: str | None
    flags: tuple[str, ...] = ()


def verify_family(family) -> FamilyReport:
    """Check member sizes and every pairwise intersection; report the first
    violation, or success with the maximum observed intersection."""
    if isinstance(family, SetFamily):
        want_size, cap = family.member_size, family.intersection_cap
    else:
        want_size, cap = family.weight, family.overlap_cap
    flags = []
    if getattr(family, "alpha", None) == 1.0:
        flags.append("alpha=1 boundary: overlap cap equals the weight")
    bits = family.members
    sizes = member_sizes(bits)
    bad = np.flatnonzero(sizes != want_size)
    if bad.size:
        return FamilyReport(
            False,
            None,
            f"member {bad[0]} has size {sizes[bad[0]]}, expected {want_size}",
            tuple(flags),
        )
    n = bits.shape[0]
    if n < 2:
        return FamilyReport(True, 0 if n else None, None, tuple(flags))
    max_seen = 0
    for i in range(n - 1):
        inter = np.bitwise_count(bits[i + 1 :] & bits[i]).sum(axis=1, dtype=np.int64)
        dup = np.flatnonzero(inter == want_size)
        if dup.size:
            return FamilyReport(
                False, None, f"members {i} and {i + 1 + dup[0]} are identical", tuple(flags)
            )
        worst = int(inter.max())
        if worst > cap:
            j = i + 1 + int(np.argmax(inter))
            return FamilyReport(
                False,
                worst,
                f"members {i} and {j} intersect in {worst} > cap {cap}",
                tuple(flags),
            )
        max_seen = max(max_seen, worst)
    return FamilyReport(True, max_seen, None, tuple(flags))
