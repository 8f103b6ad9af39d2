"""Clopper-Pearson binomial confidence bounds used by the Monte-Carlo paths."""

from __future__ import annotations

import numpy as np
from scipy.stats import beta as _beta


def cp_upper(failures: int, trials: int, confidence: float = 0.99) -> float:
    """One-sided upper confidence bound on a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if failures >= trials:
        return 1.0
    return float(_beta.ppf(confidence, failures + 1, trials - failures))


def cp_interval(failures: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    """Two-sided equal-tailed interval bracketing the point estimate."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tail = (1.0 - confidence) / 2.0
    lo = 0.0 if failures == 0 else float(_beta.ppf(tail, failures, trials - failures + 1))
    hi = 1.0 if failures == trials else float(_beta.ppf(1.0 - tail, failures + 1, trials - failures))
    return lo, hi


def cp_interval_array(failures: np.ndarray, trials: int, confidence: float = 0.99):
    """Vectorized two-sided intervals, stacked (..., 2); negative entries in
    `failures` (not-applicable markers) yield NaN rows."""
    f = np.asarray(failures, dtype=np.float64)
    tail = (1.0 - confidence) / 2.0
    f_lo = np.maximum(f, 1.0)  # dummy where the closed form is 0 anyway
    f_hi = np.minimum(f, float(trials - 1))  # dummy where it is 1 anyway
    lo = np.where(f <= 0, 0.0, _beta.ppf(tail, f_lo, trials - f_lo + 1.0))
    hi = np.where(f >= trials, 1.0, _beta.ppf(1.0 - tail, f_hi + 1.0, trials - f_hi))
    out = np.stack([lo, hi], axis=-1)
    out[f < 0] = np.nan
    return out
