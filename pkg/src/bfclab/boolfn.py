"""Boolean functions of m inputs as dense truth tables, plus the named
generator families (point indicators, thresholds, AND over a subset, single
bit, ranking) and weight classes.

Index convention: input b = (b_1..b_m) maps to table index
int(b) = sum_t b_t * 2**(m-t), i.e. b_1 is the most significant bit.  This one
convention is used everywhere; the little-endian map used to view a function
as a binary sequence of length 2**m is exposed as an explicit re-indexing
permutation (`dyadic_permutation`), which is its own inverse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

M_CAP = 24
INDEX_CONVENTION = "eq-int-bigendian"


class BooleanFunction:
    """Truth table over {0,1}^m stored densely, with cached Hamming weight."""

    __slots__ = ("m", "table", "_weight")

    def __init__(self, m: int, table):
        if not 0 <= m <= M_CAP:
            raise ValueError(f"m must be in 0..{M_CAP}")
        t = np.ascontiguousarray(table, dtype=np.uint8)
        if t.shape != (1 << m,):
            raise ValueError(f"table must have length 2^{m}")
        if t.size and t.max() > 1:
            raise ValueError("table entries must be 0 or 1")
        t.setflags(write=False)
        self.m = m
        self.table = t
        self._weight = int(t.sum())

    @classmethod
    def from_indices(cls, m: int, ones) -> "BooleanFunction":
        t = np.zeros(1 << m, dtype=np.uint8)
        t[np.asarray(list(ones), dtype=np.int64)] = 1
        return cls(m, t)

    @property
    def weight(self) -> int:
        return self._weight

    def __getitem__(self, i: int) -> int:
        return int(self.table[i])

    def __call__(self, assignment) -> int:
        return int(self.table[int_of_assignment(assignment)])

    def preimage_of_one(self) -> np.ndarray:
        return np.flatnonzero(self.table)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, BooleanFunction)
            and self.m == other.m
            and bool(np.array_equal(self.table, other.table))
        )

    def __hash__(self):
        return hash((self.m, self.table.tobytes()))

    def __repr__(self):
        return f"BooleanFunction(m={self.m}, weight={self._weight})"

    def to_json_dict(self) -> dict:
        packed = np.packbits(self.table, bitorder="little")
        return {
            "m": self.m,
            "table_hex": packed.tobytes().hex(),
            "index_convention": INDEX_CONVENTION,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "BooleanFunction":
        m = d["m"]
        raw = np.frombuffer(bytes.fromhex(d["table_hex"]), dtype=np.uint8)
        table = np.unpackbits(raw, bitorder="little")[: 1 << m]
        return cls(m, table)


def load_function(path) -> BooleanFunction:
    with open(path) as fh:
        return BooleanFunction.from_json_dict(json.load(fh))


def save_function(f: BooleanFunction, path) -> None:
    with open(path, "w") as fh:
        json.dump(f.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def int_of_assignment(bits) -> int:
    """Big-endian index of an assignment (b_1..b_m)."""
    v = 0
    for b in bits:
        v = (v << 1) | (1 if b else 0)
    return v


def assignment_of_int(m: int, i: int) -> tuple[int, ...]:
    return tuple((i >> (m - t)) & 1 for t in range(1, m + 1))


def _bit_columns(m: int) -> np.ndarray:
    """(m, 2^m) matrix whose row t-1 is the value of b_t at every index."""
    idx = np.arange(1 << m)
    return np.array([(idx >> (m - t)) & 1 for t in range(1, m + 1)], dtype=np.uint8)


def make_id(m: int, subset) -> BooleanFunction:
    """Point indicator: 1 exactly on the assignment whose support is `subset`."""
    sub = set(subset)
    if not sub <= set(range(1, m + 1)):
        raise ValueError(f"subset must be contained in 1..{m}")
    idx = sum(1 << (m - i) for i in sub)
    return BooleanFunction.from_indices(m, [idx])


def make_threshold_exact(m: int, beta: int) -> BooleanFunction:
    """1 iff the input has exactly beta ones."""
    if not 0 <= beta <= m:
        raise ValueError("beta out of range")
    pop = _bit_columns(m).sum(axis=0)
    return BooleanFunction(m, (pop == beta).astype(np.uint8))


def make_threshold_atmost(m: int, beta: int) -> BooleanFunction:
    """1 iff the input has at most beta ones."""
    if not 0 <= beta <= m:
        raise ValueError("beta out of range")
    pop = _bit_columns(m).sum(axis=0)
    return BooleanFunction(m, (pop <= beta).astype(np.uint8))


def make_and(m: int, subset) -> BooleanFunction:
    """AND over the bits named by `subset`; the empty subset is constant true."""
    sub = set(subset)
    if not sub <= set(range(1, m + 1)):
        raise ValueError(f"subset must be contained in 1..{m}")
    mask = sum(1 << (m - i) for i in sub)
    idx = np.arange(1 << m)
    return BooleanFunction(m, ((idx & mask) == mask).astype(np.uint8))


def make_bit(m: int, t: int) -> BooleanFunction:
    """Projection onto bit t."""
    if not 1 <= t <= m:
        raise ValueError("t out of range")
    idx = np.arange(1 << m)
    return BooleanFunction(m, ((idx >> (m - t)) & 1).astype(np.uint8))


def make_rank(m: int, r: int) -> BooleanFunction:
    """1 iff int(b) <= r; has weight r + 1."""
    if not 0 <= r <= (1 << m) - 1:
        raise ValueError("r out of range")
    idx = np.arange(1 << m)
    return BooleanFunction(m, (idx <= r).astype(np.uint8))


def weight(f: BooleanFunction) -> int:
    return f.weight


def flip(f: BooleanFunction) -> BooleanFunction:
    """Complement the output; weight maps to 2^m - weight."""
    return BooleanFunction(f.m, 1 - f.table)


@dataclass(frozen=True)
class FunctionClass:
    kind: str  # eq_weight | le_weight | ge_weight
    S: int
    m: int

    def __post_init__(self):
        if self.kind not in ("eq_weight", "le_weight", "ge_weight"):
            raise ValueError("kind must be eq_weight, le_weight or ge_weight")
        if not 0 <= self.S <= (1 << self.m):
            raise ValueError("S must be in 0..2^m")


def in_class(f: BooleanFunction, cls: FunctionClass) -> bool:
    if f.m != cls.m:
        return False
    if cls.kind == "eq_weight":
        return f.weight == cls.S
    if cls.kind == "le_weight":
        return f.weight <= cls.S
    return f.weight >= cls.S


@lru_cache(maxsize=32)
def dyadic_permutation(m: int) -> np.ndarray:
    """Bit-reversal permutation linking the big-endian table index to the
    little-endian sequence position; an involution that preserves weights and
    pairwise preimage intersections."""
    idx = np.arange(1 << m)
    pos = np.zeros_like(idx)
    for t in range(1, m + 1):
        pos |= ((idx >> (m - t)) & 1) << (t - 1)
    pos.setflags(write=False)
    return pos


def weight_sequence_of(f: BooleanFunction) -> np.ndarray:
    """The function viewed as a binary sequence of length 2^m (little-endian
    position convention)."""
    return f.table[dyadic_permutation(f.m)]


def function_from_weight_sequence(seq, m: int) -> BooleanFunction:
    seq = np.asarray(seq, dtype=np.uint8)
    if seq.shape != (1 << m,):
        raise ValueError(f"sequence must have length 2^{m}")
    return BooleanFunction(m, seq[dyadic_permutation(m)])
