"""Variance and mean estimation for the selection counts.

Three independent routes to the limiting variance constant sigma^2 of the
selection count per observation:

  replication        sample variance of counts over many runs, divided by n
  regenerative       one long stationary-policy run split into i.i.d. blocks
                     at the renewal indices X_i >= 1 - xi
  covariance_series  lag-0 variance plus twice the tail autocovariances of
                     the stationary selection indicator

plus the CLT diagnostic (standardized counts against a normal) and the
coupled-policy closeness ladder.  Every estimator derives per-replication
streams from (seed, domain, index), so reports are bit-reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import rng
from ._kernels import threshold_path
from .bellman import ASYMPTOTIC_RATE, ThresholdFamily
from .policies import PolicyKind, sample_coupled_counts, sample_selection_counts
from .stats import count_moments, excess_kurtosis, ks_normal, skewness

__all__ = [
    "EstimatorReport",
    "CltDiagnostic",
    "LadderRung",
    "InsufficientData",
    "estimate_sigma2_replication",
    "estimate_sigma2_regenerative",
    "estimate_sigma2_series",
    "clt_diagnostic",
    "l2_closeness",
    "report_json_dict",
    "write_standardized_csv",
]


class InsufficientData(RuntimeError):
    """Too few regeneration blocks to form the estimate."""


@dataclass(frozen=True, eq=False)
class EstimatorReport:
    method: str  # "replication" | "regenerative" | "covariance_series"
    estimate: float
    std_error: float
    ci95: tuple[float, float]
    reps_or_lags: int
    diagnostics: dict[str, float]

    def __post_init__(self) -> None:
        if self.std_error < 0.0:
            raise ValueError("standard error must be non-negative")
        if not self.ci95[0] <= self.estimate <= self.ci95[1]:
            raise ValueError("confidence interval must bracket the estimate")


@dataclass(frozen=True, eq=False)
class CltDiagnostic:
    """Standardized selection counts and their distance from normality."""

    n: int
    reps: int
    standardized: np.ndarray
    ks_to_normal: float
    skew: float
    excess_kurtosis: float

    def __post_init__(self) -> None:
        if len(self.standardized) != self.reps:
            raise ValueError("one standardized value per replication required")


@dataclass(frozen=True)
class LadderRung:
    n: int
    var_delta_over_n: float
    std_error: float
    reps: int


def _variance_with_se(counts: np.ndarray) -> tuple[float, float, float, float]:
    """Sample variance of counts and the SE of that variance.

    SE from the asymptotic variance of the sample variance,
    Var(S^2) ~= (m4 - m2^2) / reps, using the sample fourth moment.
    """
    reps = len(counts)
    mean, m2, _, m4 = count_moments(counts)
    s2 = m2 * reps / (reps - 1)
    se = np.sqrt(max(m4 - m2 * m2, 0.0) / reps)
    return mean, s2, se, m4


def estimate_sigma2_replication(n: int, reps: int, policy: PolicyKind,
                                seed: int) -> EstimatorReport:
    """Variance of the selection count across independent runs, over n."""
    if reps < 1000:
        raise ValueError(f"need reps >= 1000, got {reps}")
    counts = sample_selection_counts(policy, n, reps, seed,
                                     domain=rng.REPLICATION)
    mean, s2, se_s2, m4 = _variance_with_se(counts)
    est = s2 / n
    se = se_s2 / n
    return EstimatorReport(
        method="replication",
        estimate=est,
        std_error=se,
        ci95=(est - 1.96 * se, est + 1.96 * se),
        reps_or_lags=reps,
        diagnostics={
            "n": float(n),
            "mean_count": mean,
            "mean_rate": mean / n,
            "count_variance": s2,
            "fourth_central_moment": m4,
        },
    )


def _blocks_from_path(selected: np.ndarray, renewal: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Block sums and lengths between consecutive renewal indices.

    The segment before the first renewal is dropped: the chain only starts
    from the common post-renewal law once a renewal has occurred, so that
    first stretch is the one piece with a different distribution.
    """
    marks = np.flatnonzero(renewal)
    if len(marks) < 2:
        raise InsufficientData("fewer than two renewals in the trajectory")
    lengths = np.diff(marks)
    csel = np.concatenate([[0], np.cumsum(selected, dtype=np.int64)])
    sums = csel[marks[1:] + 1] - csel[marks[:-1] + 1]
    return sums.astype(np.int64), lengths.astype(np.int64)


def estimate_sigma2_regenerative(n: int, policy: PolicyKind, xi: float,
                                 seed: int) -> EstimatorReport:
    """Regenerative estimate from one long stationary-policy trajectory.

    Splits the run at the indices with X_i >= 1 - xi into i.i.d. blocks
    (U_t, l_t) and forms sigma^2 = E[(U - mu l)^2] / E[l] with the ratio
    estimator mu = sum U / sum l; standard errors by the delta method.
    """
    if n < 10 ** 5:
        raise ValueError(f"regenerative run needs n >= 1e5, got {n}")
    if policy.tag != "limit":
        raise ValueError("regenerative estimator requires the limit policy")
    if abs(policy.xi - xi) > 1e-12:
        raise ValueError("policy threshold and xi disagree")
    u = rng.stream(seed, rng.REGENERATION, 0).random(n)
    selected = threshold_path(u, xi)
    sums, lengths = _blocks_from_path(selected, u >= 1.0 - xi)
    t = len(sums)
    if t < 100:
        raise InsufficientData(f"only {t} complete blocks (need >= 100)")
    total_len = float(lengths.sum())
    mu_hat = float(sums.sum()) / total_len
    mean_len = total_len / t
    resid = sums - mu_hat * lengths
    est = float(np.sum(resid * resid)) / total_len
    # delta method on the ratio of block means D_t / l_t
    d = resid * resid
    se = float(np.std(d - est * lengths, ddof=1)) / (np.sqrt(t) * mean_len)
    mu_se = float(np.std(resid, ddof=1)) / (np.sqrt(t) * mean_len)
    return EstimatorReport(
        method="regenerative",
        estimate=est,
        std_error=se,
        ci95=(est - 1.96 * se, est + 1.96 * se),
        reps_or_lags=t,
        diagnostics={
            "n": float(n),
            "mu_hat": mu_hat,
            "mu_se": mu_se,
            "mu_gap_to_asymptotic": mu_hat - ASYMPTOTIC_RATE,
            "mean_block_length": mean_len,
            "blocks": float(t),
        },
    )


def estimate_sigma2_series(xi: float, max_lag: int, reps: int,
                           seed: int) -> EstimatorReport:
    """Autocovariance-series estimate from stationary chain replications.

    Each replication starts the chain stationary and runs max_lag steps;
    the per-replication statistic c_0 + 2 sum_{j<=max_lag} c_j makes the
    standard error an honest i.i.d. one.  The reported truncation bound
    4 sum_{l>max_lag} (1-xi)^l comes from the phi-mixing rate of the chain.
    """
    if max_lag < 0:
        raise ValueError(f"max_lag must be >= 0, got {max_lag}")
    if reps < 2:
        raise ValueError(f"need reps >= 2, got {reps}")
    ind = np.empty((reps, max_lag + 1))
    batch = 20000
    for lo in range(0, reps, batch):
        hi = min(lo + batch, reps)
        u = rng.uniform_rows(seed, rng.SERIES, lo, hi, max_lag + 2)
        y = u[:, 0] * (1.0 - xi)  # stationary Y'_0
        for j in range(max_lag + 1):
            x = u[:, j + 1]
            accept = x >= np.maximum(xi, y)
            ind[lo:hi, j] = accept
            y = np.where(accept, 1.0 - x, y)
    mu_hat = float(ind.mean())
    centered = ind - mu_hat
    if max_lag == 0:
        stat = centered[:, 0] * centered[:, 0]
    else:
        stat = centered[:, 0] * (centered[:, 0]
                                 + 2.0 * centered[:, 1:].sum(axis=1))
    est = float(stat.mean())
    se = float(stat.std(ddof=1)) / np.sqrt(reps)
    truncation = 4.0 * (1.0 - xi) ** (max_lag + 1) / xi
    lag0 = float((centered[:, 0] ** 2).mean())
    return EstimatorReport(
        method="covariance_series",
        estimate=est,
        std_error=se,
        ci95=(est - 1.96 * se, est + 1.96 * se),
        reps_or_lags=max_lag,
        diagnostics={
            "reps": float(reps),
            "mu_hat": mu_hat,
            "lag0_term": lag0,
            "truncation_bound": truncation,
            "xi": xi,
        },
    )


def clt_diagnostic(n: int, reps: int, policy: PolicyKind, center_mode: str,
                   sigma2: float, seed: int,
                   dp_value: float | None = None) -> CltDiagnostic:
    """Standardize the counts and measure their distance from N(0, 1).

    ``center_mode`` picks the centering: "dp_value" uses the exact expected
    count of the optimal policy (must be supplied), "asymptotic" uses
    (2 - sqrt(2)) n.
    """
    if sigma2 <= 0.0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if reps < 1000:
        raise ValueError(f"need reps >= 1000, got {reps}")
    if center_mode == "dp_value":
        if dp_value is None:
            raise ValueError("center_mode='dp_value' needs the DP value v_n(0)")
        center = dp_value
    elif center_mode == "asymptotic":
        center = ASYMPTOTIC_RATE * n
    else:
        raise ValueError(f"unknown center_mode {center_mode!r}")
    counts = sample_selection_counts(policy, n, reps, seed, domain=rng.CLT)
    standardized = (counts - center) / np.sqrt(n * sigma2)
    standardized.setflags(write=False)
    return CltDiagnostic(
        n=n,
        reps=reps,
        standardized=standardized,
        ks_to_normal=ks_normal(standardized),
        skew=skewness(standardized),
        excess_kurtosis=excess_kurtosis(standardized),
    )


def l2_closeness(n_list: list[int], reps: int, tf: ThresholdFamily, xi: float,
                 seed: int) -> list[LadderRung]:
    """Variance of the coupled count difference, per observation.

    For each rung n the optimal policy with horizon n and the limit policy
    run coupled on shared uniforms for n - 2 steps (stopping short of the
    greedy tail keeps every threshold at or above 1/6); the rung records
    var(opt - lim) / n.  Down the ladder this must fall toward zero.
    """
    rungs = []
    for idx, n in enumerate(sorted(n_list)):
        if n < 3:
            raise ValueError(f"rung n = {n} too small (need n >= 3)")
        if n > tf.horizon + 2:
            raise ValueError(f"rung n = {n} exceeds horizon + 2 = {tf.horizon + 2}")
        c_opt, c_lim = sample_coupled_counts(
            tf, xi, n, reps, seed, domain=rng.CLOSENESS, steps=n - 2
        )
        delta = c_opt - c_lim
        _, s2, se_s2, _ = _variance_with_se(delta)
        rungs.append(LadderRung(n, s2 / n, se_s2 / n, reps))
    return rungs


def report_json_dict(report: EstimatorReport, params: dict | None = None) -> dict:
    """JSON payload: {method, estimate, std_error, ci95, params, diagnostics}."""
    return {
        "method": report.method,
        "estimate": report.estimate,
        "std_error": report.std_error,
        "ci95": list(report.ci95),
        "reps_or_lags": report.reps_or_lags,
        "params": params or {},
        "diagnostics": dict(sorted(report.diagnostics.items())),
    }


def write_standardized_csv(diag: CltDiagnostic, stream) -> None:
    """Dump the standardized replication values for external plotting."""
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(["replication", "standardized"])
    for i, z in enumerate(diag.standardized):
        writer.writerow([i, f"{z:.12g}"])
