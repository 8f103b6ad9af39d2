"""Inner transmission codes: codewords plus a total decoding rule inducing
disjoint decoding regions, with a verified maximum per-codeword error delta.

The decoder is either maximum-likelihood with deterministic ties toward the
smallest codeword index, or an explicit decision table for tiny blocklengths.
Outputs with probability zero under every codeword decode to the erasure
bucket (index M), which counts as an error for every codeword; such outputs
carry no probability mass, so regions stay an exact partition for free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._stats import cp_interval, cp_upper
from .channel import DEFAULT_ENUM_CAP, Channel, sample_outputs

_RANDOM_RETRY_CAP = 10_000


@dataclass(frozen=True)
class TransmissionCode:
    n: int
    codewords: np.ndarray = field(repr=False)
    decoder: object = "ml"  # "ml" or an int array indexed by output-word index
    delta: float | None = None
    delta_mode: str = "unverified"  # exact | mc_upper | unverified

    def __post_init__(self):
        cw = np.array(self.codewords, dtype=np.int64)
        if cw.ndim != 2 or cw.shape[1] != self.n:
            raise ValueError("codewords must be a (M, n) array")
        if len({tuple(row) for row in cw.tolist()}) != cw.shape[0]:
            raise ValueError("codewords must be distinct")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)
        if isinstance(self.decoder, str):
            if self.decoder != "ml":
                raise ValueError("decoder must be 'ml' or an explicit table")
        else:
            tab = np.array(self.decoder, dtype=np.int32)
            if tab.min() < 0 or tab.max() > cw.shape[0]:
                raise ValueError("decoder table entries must lie in 0..M (M = erasure)")
            tab.setflags(write=False)
            object.__setattr__(self, "decoder", tab)

    @property
    def size(self) -> int:
        return int(self.codewords.shape[0])

    def to_json_dict(self) -> dict:
        if isinstance(self.decoder, str):
            dec = "ml"
        else:
            dec = {"table": {str(i): int(v) for i, v in enumerate(self.decoder)}}
        return {
            "n": self.n,
            "codewords": self.codewords.tolist(),
            "decoder": dec,
            "delta": self.delta,
            "delta_mode": self.delta_mode,
        }


@dataclass(frozen=True)
class InnerErrorReport:
    per_codeword: np.ndarray
    delta: float
    mode: str
    trials: int | None = None
    upper99: np.ndarray | None = None

    def __iter__(self):
        # allow `errvec, delta = eval_inner_error(...)`
        yield self.per_codeword
        yield self.delta


def load_code(path) -> TransmissionCode:
    with open(path) as fh:
        d = json.load(fh)
    dec = d["decoder"]
    if isinstance(dec, dict):
        table = dec["table"]
        n_out = max(int(k) for k in table) + 1
        arr = np.empty(n_out, dtype=np.int32)
        for k, v in table.items():
            arr[int(k)] = v
        dec = arr
    return TransmissionCode(
        n=d["n"],
        codewords=np.array(d["codewords"]),
        decoder=dec,
        delta=d.get("delta"),
        delta_mode=d.get("delta_mode", "unverified"),
    )


def save_code(code: TransmissionCode, path) -> None:
    with open(path, "w") as fh:
        json.dump(code.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def output_space_size(channel: Channel, n: int) -> int:
    return channel.output_size**n


def decoder_statistics(
    code: TransmissionCode, channel: Channel, enum_cap: int = DEFAULT_ENUM_CAP
):
    """Exact (R, decode_table) over the full output space.

    R[k, d] is the probability, given codeword k, that the decoder emits d;
    column M is the erasure bucket.  decode_table maps every output-word index
    to its decision; it doubles as the fast decode path for Monte Carlo runs.
    """
    total = output_space_size(channel, code.n)
    if total > enum_cap:
        raise ValueError(
            f"exact enumeration needs |Y|^n = {total} <= cap {enum_cap}"
        )
    table = None if isinstance(code.decoder, str) else np.asarray(code.decoder)
    if table is not None and table.shape[0] != total:
        raise ValueError("decoder table length does not match |Y|^n")
    return _kernels.confusion_matrix(channel.transition, code.codewords, total, table)


def eval_inner_error(
    code: TransmissionCode,
    channel: Channel,
    mode: str = "exact",
    trials: int = 100_000,
    seed: int = 0,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> InnerErrorReport:
    """Per-codeword error W(E_k^c | u_k) and its maximum.

    Exact mode enumerates all output words; Monte-Carlo mode returns point
    estimates with 99% Clopper-Pearson upper bounds (delta is then the largest
    upper bound).
    """
    M = code.size
    if mode == "exact":
        R, _ = decoder_statistics(code, channel, enum_cap)
        err = np.empty(M)
        for k in range(M):
            mask = np.ones(M + 1, dtype=bool)
            mask[k] = False
            err[k] = float(np.sum(R[k][mask]))
        return InnerErrorReport(err, float(err.max()), "exact")
    if mode != "monte_carlo":
        raise ValueError("mode must be 'exact' or 'monte_carlo'")
    if trials < 1:
        raise ValueError("monte_carlo mode needs trials >= 1")
    table = None
    if output_space_size(channel, code.n) <= enum_cap and isinstance(code.decoder, str):
        _, table = decoder_statistics(code, channel, enum_cap)
    elif not isinstance(code.decoder, str):
        table = np.asarray(code.decoder)
    est = np.empty(M)
    hi = np.empty(M)
    for k in range(M):
        rng = np.random.default_rng(np.random.SeedSequence((seed, k)))
        x = np.broadcast_to(code.codewords[k], (trials, code.n))
        y = sample_outputs(channel, x, rng)
        if table is not None:
            pow_vec = _kernels._digit_weights(code.n, channel.output_size)
            d = table[y @ pow_vec]
        else:
            d = _kernels.decode_words(channel.transition, code.codewords, y)
        failures = int(np.count_nonzero(d != k))
        est[k] = failures / trials
        hi[k] = cp_upper(failures, trials)
    return InnerErrorReport(est, float(hi.max()), "monte_carlo", trials, hi)


def build_identity_code(
    channel: Channel, n: int, enum_cap: int = DEFAULT_ENUM_CAP
) -> TransmissionCode:
    """Noiseless baseline: every input word is a codeword and delta is 0."""
    if not channel.is_permutation():
        raise ValueError("channel not noiseless")
    X = channel.input_size
    M = X**n
    if M > enum_cap:
        raise ValueError(f"|X|^n = {M} exceeds cap {enum_cap}")
    pow_vec = _kernels._digit_weights(n, X)
    idx = np.arange(M, dtype=np.int64)
    codewords = (idx[:, None] // pow_vec[None, :]) % X
    return TransmissionCode(n, codewords, "ml", 0.0, "exact")


def ml_code_from_codewords(
    channel: Channel,
    codewords,
    n: int | None = None,
    trials: int = 100_000,
    seed: int = 0,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> TransmissionCode:
    """Wrap explicit codewords with the ML decoder and a verified delta."""
    cw = np.array(codewords, dtype=np.int64)
    n = cw.shape[1] if n is None else n
    code = TransmissionCode(n, cw, "ml")
    if output_space_size(channel, n) <= enum_cap:
        rep = eval_inner_error(code, channel, "exact", enum_cap=enum_cap)
        return TransmissionCode(n, cw, "ml", rep.delta, "exact")
    rep = eval_inner_error(code, channel, "monte_carlo", trials=trials, seed=seed)
    return TransmissionCode(n, cw, "ml", rep.delta, "mc_upper")


def build_random_code(
    channel: Channel,
    n: int,
    M: int,
    seed: int,
    trials: int = 100_000,
    enum_cap: int = DEFAULT_ENUM_CAP,
) -> TransmissionCode:
    """i.i.d. uniform random codewords (duplicates redrawn), ML decoding."""
    X = channel.input_size
    if M > X**n:
        raise ValueError(f"M = {M} exceeds |X|^n = {X ** n}")
    rng = np.random.default_rng(seed)
    cw = rng.integers(0, X, size=(M, n), dtype=np.int64)
    for _ in range(_RANDOM_RETRY_CAP):
        _, first = np.unique(cw, axis=0, return_index=True)
        dup = np.setdiff1d(np.arange(M), first)
        if dup.size == 0:
            break
        cw[dup] = rng.integers(0, X, size=(dup.size, n), dtype=np.int64)
    else:
        raise RuntimeError("could not draw distinct codewords within the retry cap")
    return ml_code_from_codewords(channel, cw, n, trials=trials, seed=seed, enum_cap=enum_cap)
