"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The numba path is the default; set BFCLAB_NUMBA=0 (or call set_backend("numpy"))
to force the vectorized numpy fallback.  Both paths consume identical inputs and
produce identical integer results (decoded indices, greedy selections).  Float
accumulations use a fixed chunk partition of size CHUNK so that results do not
depend on the number of numba threads.
"""

from __future__ import annotations

import os

import numpy as np

# Fixed partition size for all chunked reductions.  Results are summed per
# chunk and combined in chunk order, so thread count never changes the output.
CHUNK = 4096

_env = os.environ.get("BFCLAB_NUMBA", "1").strip().lower()
_want_numba = _env not in ("0", "false", "off", "no")

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        return wrap

    prange = range  # type: ignore[assignment]

_backend = "numba" if (_HAVE_NUMBA and _want_numba) else "numpy"


def active_backend() -> str:
    """Name of the kernel implementation currently in use."""
    return _backend


def set_backend(name: str) -> None:
    """Switch kernels between "numba" and "numpy" at runtime (mainly for tests)."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba is not importable in this environment")
    _backend = name


def _digit_weights(n: int, base: int) -> np.ndarray:
    # Big-endian word index: word (y_1..y_n) <-> sum_t y_t * base**(n-t).
    return base ** np.arange(n - 1, -1, -1, dtype=np.int64)


# ---------------------------------------------------------------------------
# Confusion matrix over the full output space.
#
# R[k, d] = total probability, given codeword k was sent, of the decoder
# emitting d (d = M meaning erasure: every codeword has probability 0 there).
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _confusion_numba(W, codewords, total, table, use_table, partials, decoded):
    M, n = codewords.shape
    Y = W.shape[1]
    nchunks = partials.shape[0]
    for c in prange(nchunks):
        start = c * CHUNK
        end = min(start + CHUNK, total)
        acc = np.zeros((M, M + 1))
        comp = np.zeros((M, M + 1))
        probs = np.empty(M)
        digs = np.empty(n, np.int64)
        for yi in range(start, end):
            r = yi
            for t in range(n - 1, -1, -1):
                digs[t] = r % Y
                r //= Y
            best = 0
            bestp = -1.0
            for k in range(M):
                p = 1.0
                for t in range(n):
                    p *= W[codewords[k, t], digs[t]]
                probs[k] = p
                if p > bestp:
                    bestp = p
                    best = k
            if use_table:
                d = table[yi]
            elif bestp == 0.0:
                d = M
            else:
                d = best
            decoded[yi] = d
            for k in range(M):
                # Kahan update keeps per-cell chunk sums tight.
                y = probs[k] - comp[k, d]
                t2 = acc[k, d] + y
                comp[k, d] = (t2 - acc[k, d]) - y
                acc[k, d] = t2
        partials[c] = acc


def _confusion_numpy(W, codewords, total, table):
    M, n = codewords.shape
    Y = W.shape[1]
    pow_vec = _digit_weights(n, Y)
    nchunks = (total + CHUNK - 1) // CHUNK
    partials = np.zeros((nchunks, M, M + 1))
    decoded = np.empty(total, np.int32)
    for c in range(nchunks):
        start = c * CHUNK
        idx = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
        digs = (idx[:, None] // pow_vec[None, :]) % Y
        P = np.ones((M, idx.size))
        for t in range(n):
            P *= W[codewords[:, t]][:, digs[:, t]]
        if table is None:
            d = np.argmax(P, axis=0).astype(np.int32)
            mx = P[d, np.arange(idx.size)]
            d[mx == 0.0] = M
        else:
            d = table[idx].astype(np.int32)
        decoded[start : start + idx.size] = d
        for k in range(M):
            partials[c, k] = np.bincount(d, weights=P[k], minlength=M + 1)
    return partials, decoded


def confusion_matrix(W, codewords, total, table=None):
    """Exact decoder statistics by enumerating every length-n output word.

    Returns (R, decoded): R is (M, M+1) with the erasure bucket last, decoded
    maps each output index to its decoder decision.  `table` overrides the
    maximum-likelihood rule with an explicit decision table.
    """
    W = np.ascontiguousarray(W, dtype=np.float64)
    codewords = np.ascontiguousarray(codewords, dtype=np.int64)
    M = codewords.shape[0]
    if _backend == "numba":
        nchunks = (total + CHUNK - 1) // CHUNK
        partials = np.zeros((nchunks, M, M + 1))
        decoded = np.empty(total, np.int32)
        use_table = table is not None
        tab = table.astype(np.int32) if use_table else np.empty(0, np.int32)
        _confusion_numba(W, codewords, total, tab, use_table, partials, decoded)
    else:
        partials, decoded = _confusion_numpy(W, codewords, total, table)
    return partials.sum(axis=0), decoded


# ---------------------------------------------------------------------------
# Batch decoding of explicit output words (Monte-Carlo support).
# ---------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _decode_numba(W, codewords, ywords, out):
    M, n = codewords.shape
    T = ywords.shape[0]
    nchunks = (T + CHUNK - 1) // CHUNK
    for c in prange(nchunks):
        start = c * CHUNK
        end = min(start + CHUNK, T)
        for i in range(start, end):
            best = 0
            bestp = -1.0
            for k in range(M):
                p = 1.0
                for t in range(n):
                    p *= W[codewords[k, t], ywords[i, t]]
                if p > bestp:
                    bestp = p
                    best = k
            out[i] = M if bestp == 0.0 else best


def _decode_numpy(W, codewords, ywords, out):
    M, n = codewords.shape
    T = ywords.shape[0]
    for start in range(0, T, CHUNK):
        end = min(start + CHUNK, T)
        P = np.ones((M, end - start))
        for t in range(n):
            P *= W[codewords[:, t]][:, ywords[start:end, t]]
        d = np.argmax(P, axis=0).astype(np.int32)
        mx = P[d, np.arange(end - start)]
        d[mx == 0.0] = M
        out[start:end] = d


def decode_words(W, codewords, ywords):
    """Maximum-likelihood decode a batch of output words (ties to smallest k)."""
    W = np.ascontiguousarray(W, dtype=np.float64)
    codewords = np.ascontiguousarray(codewords, dtype=np.int64)
    ywords = np.ascontiguousarray(ywords, dtype=np.int64)
    out = np.empty(ywords.shape[0], np.int32)
    if _backend == "numba":
        _decode_numba(W, codewords, ywords, out)
    else:
        _decode_numpy(W, codewords, ywords, out)
    return out


# ---------------------------------------------------------------------------
# Greedy selection of bit-vector candidates under a pairwise-intersection cap.
# Both paths return the same accepted candidate indices, in candidate order.
# ---------------------------------------------------------------------------


@njit(cache=True, inline="always")
def _pop64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + (
        (x >> np.uint64(2)) & np.uint64(0x3333333333333333)
    )
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def _greedy_numba(bits, cap, target):
    N, nw = bits.shape
    limit = min(target, N)
    acc_idx = np.empty(limit, np.int64)
    acc_bits = np.empty((limit, nw), np.uint64)
    count = 0
    for i in range(N):
        ok = True
        for a in range(count):
            s = 0
            for w in range(nw):
                s += np.int64(_pop64(bits[i, w] & acc_bits[a, w]))
            if s > cap:
                ok = False
                break
        if ok:
            acc_idx[count] = i
            acc_bits[count] = bits[i]
            count += 1
            if count == limit:
                break
    return acc_idx[:count]


def _greedy_numpy(bits, cap, target):
    N = bits.shape[0]
    alive = np.ones(N, dtype=bool)
    accepted = []
    pos = 0
    while len(accepted) < target:
        nxt = -1
        for i in range(pos, N):
            if alive[i]:
                nxt = i
                break
        if nxt < 0:
            break
        accepted.append(nxt)
        inter = np.bitwise_count(bits & bits[nxt]).sum(axis=1, dtype=np.int64)
        alive &= inter <= cap
        alive[nxt] = False
        pos = nxt + 1
    return np.asarray(accepted, dtype=np.int64)


def greedy_select(bits, cap: int, target: int) -> np.ndarray:
    """Scan candidates in order, keeping those intersecting every earlier keep
    in at most `cap` elements; stop after `target` keeps."""
    bits = np.ascontiguousarray(bits, dtype=np.uint64)
    if _backend == "numba":
        return _greedy_numba(bits, cap, target)
    return _greedy_numpy(bits, cap, target)


def pairwise_intersections(bits) -> np.ndarray:
    """Dense (N, N) support-intersection matrix for packed bit rows."""
    bits = np.ascontiguousarray(bits, dtype=np.uint64)
    N = bits.shape[0]
    out = np.zeros((N, N), dtype=np.int64)
    for i in range(N):
        out[i] = np.bitwise_count(bits & bits[i]).sum(axis=1, dtype=np.int64)
    return out
