"""Kolmogorov-Smirnov distances and moment summaries.

Only what the diagnostics need: one- and two-sample KS statistics, the
asymptotic critical values (hard-coded coefficients, no test framework),
and central-moment helpers with exact integer accumulation for count data.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

__all__ = [
    "ks_distance",
    "ks_uniform",
    "ks_normal",
    "ks_two_sample",
    "ks_critical",
    "ks_critical_two_sample",
    "count_moments",
    "skewness",
    "excess_kurtosis",
]

# c(alpha) with D_crit = c(alpha) / sqrt(n): sqrt(-ln(alpha/2) / 2)
_KS_COEFF = {0.10: 1.2238, 0.05: 1.3581, 0.01: 1.6276}


def ks_distance(sample: np.ndarray, cdf) -> float:
    """Sup distance between the empirical CDF and a given CDF callable."""
    s = np.sort(np.asarray(sample, float))
    n = len(s)
    f = cdf(s)
    up = np.max(np.arange(1, n + 1) / n - f)
    down = np.max(f - np.arange(0, n) / n)
    return float(max(up, down))


def ks_uniform(sample: np.ndarray, lo: float = 0.0, hi: float = 1.0) -> float:
    span = hi - lo
    return ks_distance(sample, lambda s: np.clip((s - lo) / span, 0.0, 1.0))


def ks_normal(sample: np.ndarray) -> float:
    """KS distance to the standard normal (fixed, not fitted)."""
    return ks_distance(sample, ndtr)


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    a = np.sort(np.asarray(a, float))
    b = np.sort(np.asarray(b, float))
    both = np.concatenate([a, b])
    fa = np.searchsorted(a, both, side="right") / len(a)
    fb = np.searchsorted(b, both, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def ks_critical(n: int, alpha: float = 0.01) -> float:
    return _KS_COEFF[alpha] / math.sqrt(n)


def ks_critical_two_sample(n: int, m: int, alpha: float = 0.01) -> float:
    return _KS_COEFF[alpha] * math.sqrt((n + m) / (n * m))


def count_moments(counts: np.ndarray) -> tuple[float, float, float, float]:
    """(mean, m2, m3, m4) central moments of integer count data.

    Counts are shifted by their rounded mean and accumulated as int64, an
    error-free transformation: half a million additions then cost no
    precision at all.  Falls back to fsum when the shifted fourth powers
    could overflow.
    """
    counts = np.asarray(counts)
    n = len(counts)
    total = int(counts.sum(dtype=np.int64))
    shift = int(round(total / n))
    d = counts.astype(np.int64) - shift
    big = int(np.max(np.abs(d)))
    if n * (big ** 4) < 2 ** 62:
        s1 = int(np.sum(d))
        s2 = int(np.sum(d * d))
        s3 = int(np.sum(d * d * d))
        s4 = int(np.sum((d * d) * (d * d)))
    else:
        df = d.astype(float)
        s1 = math.fsum(df)
        s2 = math.fsum(df * df)
        s3 = math.fsum(df ** 3)
        s4 = math.fsum(df ** 4)
    mu = s1 / n  # residual mean after the integer shift
    m2 = s2 / n - mu * mu
    m3 = s3 / n - 3 * mu * (s2 / n) + 2 * mu ** 3
    m4 = (s4 / n - 4 * mu * (s3 / n) + 6 * mu * mu * (s2 / n) - 3 * mu ** 4)
    return shift + mu, m2, m3, m4


def skewness(sample: np.ndarray) -> float:
    x = np.asarray(sample, float)
    m = x.mean()
    m2 = np.mean((x - m) ** 2)
    m3 = np.mean((x - m) ** 3)
    return float(m3 / m2 ** 1.5)


def excess_kurtosis(sample: np.ndarray) -> float:
    x = np.asarray(sample, float)
    m = x.mean()
    m2 = np.mean((x - m) ** 2)
    m4 = np.mean((x - m) ** 4)
    return float(m4 / (m2 * m2) - 3.0)
