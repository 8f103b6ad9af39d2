"""Discrete memoryless channels: exact word probabilities, sampling, products,
and Shannon capacity via Blahut-Arimoto.

All rates are in bits (log base 2).  A channel is immutable after construction
and safe to share across threads; sampling takes an explicit seeded generator
so parallel callers own independent streams.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

import numpy as np

ROW_SUM_TOL = 1e-12
DEFAULT_ENUM_CAP = 2**24
DEFAULT_BA_MAX_ITER = 10_000


class CapacityConvergenceError(RuntimeError):
    """Blahut-Arimoto failed to close the upper/lower gap within the iteration cap."""

    def __init__(self, iterations: int, gap: float):
        super().__init__(
            f"capacity iteration did not converge after {iterations} iterations; "
            f"last upper-lower gap {gap:.3e}"
        )
        self.iterations = iterations
        self.gap = gap


@dataclass(frozen=True)
class Channel:
    """Finite-alphabet stochastic matrix W[x][y], row-major per input symbol."""

    input_size: int
    output_size: int
    transition: np.ndarray = field(repr=False)

    def __post_init__(self):
        W = np.array(self.transition, dtype=np.float64)
        if W.shape != (self.input_size, self.output_size):
            raise ValueError(
                f"transition shape {W.shape} does not match alphabet sizes "
                f"({self.input_size}, {self.output_size})"
            )
        if self.input_size < 1 or self.output_size < 1:
            raise ValueError("alphabet sizes must be positive")
        if np.any(W < 0.0) or np.any(W > 1.0):
            raise ValueError("transition entries must lie in [0, 1]")
        rows = W.sum(axis=1)
        bad = np.flatnonzero(np.abs(rows - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise ValueError(
                f"row {bad[0]} sums to {rows[bad[0]]!r}, not 1 within {ROW_SUM_TOL}"
            )
        W.setflags(write=False)
        object.__setattr__(self, "transition", W)

    @property
    def matrix(self) -> np.ndarray:
        return self.transition

    def is_permutation(self) -> bool:
        """True when the channel is noiseless: square 0/1 matrix, one 1 per row,
        all columns distinct."""
        W = self.transition
        if self.input_size != self.output_size:
            return False
        if not np.all((W == 0.0) | (W == 1.0)):
            return False
        if not np.all(W.sum(axis=1) == 1.0):
            return False
        return np.all(W.sum(axis=0) == 1.0)

    def to_json_dict(self) -> dict:
        return {
            "input_size": self.input_size,
            "output_size": self.output_size,
            "rows": self.transition.tolist(),
        }


def bsc(p: float) -> Channel:
    """Binary symmetric channel with crossover probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("crossover probability must be in [0, 1]")
    return Channel(2, 2, np.array([[1 - p, p], [p, 1 - p]]))


def bec(e: float) -> Channel:
    """Binary erasure channel; output symbol 2 is the erasure."""
    if not 0.0 <= e <= 1.0:
        raise ValueError("erasure probability must be in [0, 1]")
    return Channel(2, 3, np.array([[1 - e, 0.0, e], [0.0, 1 - e, e]]))


def identity_channel(k: int) -> Channel:
    if k < 1:
        raise ValueError("alphabet size must be positive")
    return Channel(k, k, np.eye(k))


_PRESET = re.compile(r"^(bsc|bec|identity):(.+)$")


def load_channel(spec) -> Channel:
    """Accept a preset string ("bsc:0.1", "bec:0.3", "identity:2"), a path to a
    channel JSON file, or an already-parsed dict."""
    if isinstance(spec, Channel):
        return spec
    if isinstance(spec, dict):
        return Channel(spec["input_size"], spec["output_size"], np.array(spec["rows"]))
    m = _PRESET.match(str(spec))
    if m:
        kind, arg = m.groups()
        if kind == "bsc":
            return bsc(float(arg))
        if kind == "bec":
            return bec(float(arg))
        return identity_channel(int(arg))
    with open(spec) as fh:
        return load_channel(json.load(fh))


def save_channel(channel: Channel, path) -> None:
    with open(path, "w") as fh:
        json.dump(channel.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def word_prob(channel: Channel, x_word, y_word) -> float:
    """Memoryless n-fold probability: product over positions of W[x_t][y_t]."""
    x = np.asarray(x_word, dtype=np.int64)
    y = np.asarray(y_word, dtype=np.int64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("input and output words must be 1-D and equal length")
    if x.size and (x.min() < 0 or x.max() >= channel.input_size):
        raise ValueError("input symbol outside the alphabet")
    if y.size and (y.min() < 0 or y.max() >= channel.output_size):
        raise ValueError("output symbol outside the alphabet")
    p = 1.0
    for xt, yt in zip(x, y):
        p *= channel.transition[xt, yt]
    return p


def sample_output(channel: Channel, x_word, rng) -> np.ndarray:
    """Draw one output word, i.i.d. per symbol from row W[x_t].

    `rng` is either an integer seed or a numpy Generator.
    """
    x = np.asarray(x_word, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= channel.input_size):
        raise ValueError("input symbol outside the alphabet")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    return sample_outputs(channel, x.reshape(1, -1), rng)[0]


def sample_outputs(channel: Channel, x_words, rng) -> np.ndarray:
    """Vectorized sampling: one output word per row of `x_words`.

    Inverse-CDF per symbol, so a fixed generator state yields fixed outputs
    regardless of kernel backend.
    """
    x = np.asarray(x_words, dtype=np.int64)
    T, n = x.shape
    cdf = np.cumsum(channel.transition, axis=1)
    thresholds = cdf[:, :-1]
    U = rng.random((T, n))
    y = np.empty((T, n), dtype=np.int64)
    for t in range(n):
        y[:, t] = np.sum(U[:, t, None] >= thresholds[x[:, t]], axis=1)
    return y


def product_channel(channel: Channel, copies: int, enum_cap: int = DEFAULT_ENUM_CAP) -> Channel:
    """Memoryless T-fold product; alphabets become |X|**T and |Y|**T."""
    if copies < 1:
        raise ValueError("copies must be a positive integer")
    if channel.input_size**copies > enum_cap or channel.output_size**copies > enum_cap:
        raise ValueError(
            f"product alphabet exceeds the cap of {enum_cap}; "
            "raise enum_cap to override"
        )
    W = channel.transition
    out = np.array([[1.0]])
    for _ in range(copies):
        out = np.kron(out, W)
    return Channel(channel.input_size**copies, channel.output_size**copies, out)


def capacity(
    channel: Channel, tol: float = 1e-9, max_iter: int = DEFAULT_BA_MAX_ITER
) -> float:
    """Shannon capacity in bits per channel use, by alternating maximization.

    Terminates once the standard upper and lower capacity estimates differ by
    at most `tol`; the returned midpoint is then within tol/2 of capacity.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    W = channel.transition
    X = channel.input_size
    p = np.full(X, 1.0 / X)
    log2W = np.where(W > 0, np.log2(np.where(W > 0, W, 1.0)), 0.0)
    gap = math.inf
    for _ in range(max_iter):
        q = p @ W
        with np.errstate(divide="ignore"):
            log2q = np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), 0.0)
        # D[x] = sum_y W[x,y] log2(W[x,y]/q[y]) with 0 log 0 = 0
        D = np.einsum("xy,xy->x", W, log2W - log2q[None, :])
        lower = float(p @ D)
        upper = float(D.max())
        gap = upper - lower
        if gap <= tol:
            return 0.5 * (upper + lower)
        p = p * np.exp2(D - D.max())
        p /= p.sum()
    raise CapacityConvergenceError(max_iter, gap)


def binary_entropy(p: float) -> float:
    """h2(p) in bits; endpoints map to 0."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)
