"""Policy execution: the finite-horizon optimal rule and its stationary limit.

A policy is a state machine over a stream of uniforms.  Starting from
Y_0 = 0, step i observes X_i, accepts it when X_i >= t_i (weak inequality),
and on acceptance the state becomes 1 - X_i.  The threshold t_i is

    optimal:          g_{n-i+1}(Y_{i-1})   (interpolated from a table)
    limit:            max(xi, Y_{i-1})
    fixed_threshold:  max(c, Y_{i-1})      (baseline/debug instrument)

``run_policy`` executes a single stream and can record the full path;
``sample_selection_counts`` drives the numba kernels over per-replication
Philox substreams for Monte Carlo work.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels, rng
from .bellman import ThresholdFamily, ValueTable, compute_values

__all__ = [
    "PolicyKind",
    "PolicyRun",
    "StreamExhausted",
    "run_policy",
    "run_coupled",
    "mean_selection_check",
    "sample_selection_counts",
    "sample_coupled_counts",
    "write_trace_csv",
]

MAX_THRESHOLD = 1.0 / 3.0
_BATCH_ROWS = 4096


class StreamExhausted(ValueError):
    """The uniform stream ended before the required n values."""


@dataclass(frozen=True, eq=False)
class PolicyKind:
    """Tagged policy description; use the class-method constructors."""

    tag: str  # "optimal" | "limit" | "fixed_threshold"
    tf: ThresholdFamily | None = None
    horizon: int | None = None
    xi: float | None = None
    c: float | None = None

    @classmethod
    def optimal(cls, tf: ThresholdFamily, n: int) -> "PolicyKind":
        if n < 1:
            raise ValueError(f"horizon must be >= 1, got {n}")
        if tf.horizon < n:
            raise ValueError(
                f"threshold table horizon {tf.horizon} < requested n = {n}"
            )
        return cls(tag="optimal", tf=tf, horizon=n)

    @classmethod
    def limit(cls, xi: float) -> "PolicyKind":
        if not 0.0 <= xi <= MAX_THRESHOLD:
            raise ValueError(f"limit threshold {xi} outside [0, 1/3]")
        return cls(tag="limit", xi=xi)

    @classmethod
    def fixed_threshold(cls, c: float) -> "PolicyKind":
        if not 0.0 <= c <= MAX_THRESHOLD:
            raise ValueError(f"fixed threshold {c} outside [0, 1/3]")
        return cls(tag="fixed_threshold", c=c)

    def threshold_at(self, i: int, n: int, y: float) -> float:
        """Acceptance threshold at 1-based step i of an n-step run."""
        if self.tag == "optimal":
            return float(self.tf.fn(n - i + 1)(y))
        level = self.xi if self.tag == "limit" else self.c
        return max(level, y)

    def level(self) -> float:
        if self.tag == "limit":
            return self.xi
        if self.tag == "fixed_threshold":
            return self.c
        raise ValueError("optimal policy has no scalar threshold level")


@dataclass(frozen=True, eq=False)
class PolicyRun:
    """Outcome of one policy execution.

    ``path``, when recorded, holds one (i, x, threshold, selected, y) tuple
    per step.
    """

    kind: PolicyKind
    n: int
    selections: int
    final_state: float
    path: list[tuple[int, float, float, bool, float]] | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.selections <= self.n:
            raise ValueError(f"selections {self.selections} outside [0, {self.n}]")
        if self.kind.tag == "limit" and self.final_state > 1.0 - self.kind.xi + 1e-12:
            raise ValueError(
                f"limit-policy state {self.final_state} exceeds {1.0 - self.kind.xi}"
            )


def _materialize(uniforms: Iterable[float] | Sequence[float],
                 n: int | None) -> np.ndarray:
    u = np.fromiter(iter(uniforms), dtype=float) \
        if not isinstance(uniforms, np.ndarray) else np.asarray(uniforms, float)
    if n is not None and len(u) != n:
        raise StreamExhausted(f"policy needs exactly {n} uniforms, got {len(u)}")
    if len(u) == 0:
        raise StreamExhausted("empty uniform stream")
    if u.min() < 0.0 or u.max() > 1.0:
        raise ValueError("uniforms must lie in [0, 1]")
    return u


def run_policy(kind: PolicyKind, uniforms, record_path: bool = False) -> PolicyRun:
    """Execute one policy over a stream of uniforms."""
    n_req = kind.horizon if kind.tag == "optimal" else None
    u = _materialize(uniforms, n_req)
    n = len(u)
    y = 0.0
    count = 0
    path = [] if record_path else None
    for i in range(1, n + 1):
        x = u[i - 1]
        t = kind.threshold_at(i, n, y)
        selected = x >= t
        if selected:
            y = 1.0 - x
            count += 1
        if record_path:
            path.append((i, float(x), float(t), bool(selected), y))
    return PolicyRun(kind, n, count, y, path)


def run_coupled(tf: ThresholdFamily, xi: float, n: int, uniforms,
                record_path: bool = False) -> tuple[PolicyRun, PolicyRun]:
    """Run the optimal and limit policies on one shared uniform stream.

    While the optimal thresholds stay within [1/6, 1/3] — every step except
    the greedy last two, where they ride the diagonal — an observation of
    at least 5/6 is selected by both policies and leaves both states equal
    to 1 - x.  Those shared renewals are what make the two selection counts
    comparable path by path.
    """
    u = _materialize(uniforms, n)
    opt = run_policy(PolicyKind.optimal(tf, n), u, record_path)
    lim = run_policy(PolicyKind.limit(xi), u, record_path)
    return opt, lim


def sample_selection_counts(kind: PolicyKind, n: int, reps: int, seed: int,
                            domain: int = rng.POLICY,
                            steps: int | None = None) -> np.ndarray:
    """Selection counts of ``reps`` independent runs (one substream each).

    ``steps`` truncates each run (thresholds still scheduled for an n-step
    horizon); defaults to the full n.
    """
    steps = n if steps is None else steps
    counts = np.empty(reps, np.int64)
    if kind.tag == "optimal":
        g = kind.tf.matrix
        inv_h = 1.0 / kind.tf.grid.step
        if n != kind.horizon:
            raise ValueError("n must match the optimal policy horizon")
    else:
        level = kind.level()
    for lo in range(0, reps, _BATCH_ROWS):
        hi = min(lo + _BATCH_ROWS, reps)
        u = rng.uniform_rows(seed, domain, lo, hi, steps)
        if kind.tag == "optimal":
            counts[lo:hi] = _kernels.optimal_counts(u, g, inv_h, n, steps)[0]
        else:
            counts[lo:hi] = _kernels.threshold_counts(u, level)[0]
    return counts


def sample_coupled_counts(tf: ThresholdFamily, xi: float, n: int, reps: int,
                          seed: int, domain: int = rng.CLOSENESS,
                          steps: int | None = None
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Coupled optimal/limit counts over shared per-replication streams."""
    steps = n if steps is None else steps
    c_opt = np.empty(reps, np.int64)
    c_lim = np.empty(reps, np.int64)
    inv_h = 1.0 / tf.grid.step
    for lo in range(0, reps, _BATCH_ROWS):
        hi = min(lo + _BATCH_ROWS, reps)
        u = rng.uniform_rows(seed, domain, lo, hi, steps)
        a, b = _kernels.coupled_counts(u, tf.matrix, inv_h, xi, n, steps)
        c_opt[lo:hi] = a
        c_lim[lo:hi] = b
    return c_opt, c_lim


def mean_selection_check(tf: ThresholdFamily, n: int, reps: int, seed: int,
                         vt: ValueTable | None = None):
    """Monte Carlo mean of optimal-policy selections against the DP value.

    The dynamic-programming identity says the expected count equals v_n(0);
    the report carries the estimate, its standard error, and that value.
    """
    from .estimators import EstimatorReport  # cycle: estimators uses policies

    if reps < 100:
        raise ValueError(f"need reps >= 100, got {reps}")
    kind = PolicyKind.optimal(tf, n)
    counts = sample_selection_counts(kind, n, reps, seed, domain=rng.MEANCHECK)
    est = float(counts.sum()) / reps  # integer sum: exact
    var = float(np.var(counts, ddof=1)) if reps > 1 else 0.0
    se = (var / reps) ** 0.5
    if vt is None:
        vt = compute_values(tf.grid, n)
    dp = vt.at_zero(n)
    return EstimatorReport(
        method="replication",
        estimate=est,
        std_error=se,
        ci95=(est - 1.96 * se, est + 1.96 * se),
        reps_or_lags=reps,
        diagnostics={
            "dp_value": dp,
            "gap": est - dp,
            "z_score": (est - dp) / se if se > 0 else 0.0,
            "n": float(n),
        },
    )


def write_trace_csv(run: PolicyRun, stream) -> None:
    """Dump a recorded path as CSV (columns i, x, threshold, selected, y)."""
    if run.path is None:
        raise ValueError("run was executed without record_path=True")
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(["i", "x", "threshold", "selected", "y"])
    for i, x, t, sel, y in run.path:
        writer.writerow([i, f"{x:.12g}", f"{t:.12g}", int(sel), f"{y:.12g}"])
