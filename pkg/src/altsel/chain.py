"""The stationary-policy Markov chain and its coupling experiment.

The pair Z_i = (X_i, Y'_{i-1}) — the incoming observation together with the
reduced state — is a Markov chain on [0,1] x [0, 1-xi] whose stationary law
is uniform on that rectangle.  Two copies driven by one shared uniform
stream merge forever at the first index with X_i >= 1 - xi: that index is
geometric with success probability xi, which turns the total-variation
mixing bound (1 - xi)^l into something a simulation can check directly.

xi is always an input here, supplied by the fixed-point iteration in
``bellman``; this module never re-derives it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng

__all__ = [
    "ChainState",
    "CouplingOutcome",
    "kernel_step",
    "kernel_step_many",
    "stationary_sample",
    "couple_once",
    "coupling_experiment",
    "coupling_report_dict",
    "push_stationary",
]

# Bonferroni-adjusted two-sided normal quantile for 20 simultaneous
# binomial bands at overall level 1%: Phi^{-1}(1 - 0.01 / 40)
_BAND_Z = 3.4808


@dataclass(frozen=True)
class ChainState:
    """One chain state: current observation x, reduced state y."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.x <= 1.0:
            raise ValueError(f"x = {self.x} outside [0, 1]")
        if not 0.0 <= self.y <= 1.0:
            raise ValueError(f"y = {self.y} outside [0, 1]")


@dataclass(frozen=True)
class CouplingOutcome:
    """Coupling time of one double-chain path.

    ``coupling_time`` is the first index whose observation clears 1 - xi;
    the chains are identical at every recorded index beyond it.
    ``pre_coupling_discrepancy`` counts the earlier steps whose reduced
    states disagreed.
    """

    coupling_time: int
    pre_coupling_discrepancy: int

    def __post_init__(self) -> None:
        if self.coupling_time < 1:
            raise ValueError("coupling time must be >= 1")


def kernel_step(z: ChainState, u_next: float, xi: float) -> ChainState:
    """One transition: accept when x >= max(xi, y) (weak inequality)."""
    if z.x >= max(xi, z.y):
        return ChainState(u_next, 1.0 - z.x)
    return ChainState(u_next, z.y)


def kernel_step_many(xs: np.ndarray, ys: np.ndarray, u_next: np.ndarray,
                     xi: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized kernel transition for arrays of states."""
    accept = xs >= np.maximum(xi, ys)
    return u_next, np.where(accept, 1.0 - xs, ys)


def stationary_sample(count: int, xi: float, seed: int,
                      index: int = 0) -> np.ndarray:
    """i.i.d. draws from the stationary law: columns (x, y).

    x is uniform on [0, 1] and y uniform on [0, 1 - xi].
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    draws = rng.stream(seed, rng.STATIONARY, index).random((count, 2))
    draws[:, 1] *= 1.0 - xi
    return draws


def push_stationary(states: np.ndarray, m: int, xi: float, seed: int,
                    index: int = 1) -> np.ndarray:
    """Advance a batch of states m kernel steps (shared fresh uniforms)."""
    xs = states[:, 0].copy()
    ys = states[:, 1].copy()
    u = rng.stream(seed, rng.STATIONARY, index).random((m, len(xs)))
    for i in range(m):
        xs, ys = kernel_step_many(xs, ys, u[i], xi)
    return np.column_stack([xs, ys])


def couple_once(y0: float, xi: float, uniforms: np.ndarray,
                ybar0: float) -> CouplingOutcome:
    """Reference single-path double chain on an explicit uniform stream.

    Both chains consume the same uniforms; raises if the stream ends before
    the renewal level 1 - xi is hit or if states differ after it.
    """
    y, ybar = y0, ybar0
    nu = 0
    disc = 0
    for i, x in enumerate(np.asarray(uniforms, float), start=1):
        if nu == 0:
            if y != ybar:
                disc += 1
            if x >= 1.0 - xi:
                nu = i
        elif y != ybar:
            raise AssertionError(f"states differ at i={i} > nu={nu}")
        y = 1.0 - x if x >= max(xi, y) else y
        ybar = 1.0 - x if x >= max(xi, ybar) else ybar
    if nu == 0:
        raise ValueError("stream exhausted before the chains coupled")
    return CouplingOutcome(nu, disc)


def coupling_experiment(z0: ChainState, reps: int, xi: float, seed: int,
                        tail_len: int = 20, horizon: int = 256):
    """Replicate the double chain and audit the coupling law.

    Each replication shares one fresh uniform stream between a chain started
    from ``z0``'s reduced state and a chain started from a stationary draw
    (the shared first observation plus an independent uniform y is exactly a
    stationary start).  Records the coupling time nu — the first index with
    X_i >= 1 - xi — checks the geometric tail (1 - xi)^l against
    simultaneous binomial bands for l = 1..tail_len, and verifies state
    equality at every recorded index past nu.

    Returns an EstimatorReport whose estimate is the mean coupling time
    (oracle: 1 / xi); the tail table and the pathwise-violation count ride
    in the diagnostics.
    """
    from .estimators import EstimatorReport

    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    if z0.y > 1.0 - xi:
        raise ValueError(f"initial reduced state {z0.y} outside [0, {1.0 - xi}]")
    nu = np.empty(reps, np.int64)
    disc = np.zeros(reps, np.int64)
    violations = 0
    batch = 20000
    level = 1.0 - xi
    for lo in range(0, reps, batch):
        hi = min(lo + batch, reps)
        m = hi - lo
        u = rng.uniform_rows(seed, rng.CHAIN, lo, hi, horizon + 1)
        ybar = u[:, 0] * (1.0 - xi)  # stationary start for the second chain
        y = np.full(m, z0.y)
        x_stream = u[:, 1:]
        hits = x_stream >= level
        if not hits.any(axis=1).all():
            raise RuntimeError(
                f"a path failed to couple within {horizon} steps"
            )
        nu_b = hits.argmax(axis=1) + 1
        nu[lo:hi] = nu_b
        bad = np.zeros(m, bool)
        for i in range(1, horizon + 1):
            differ = y != ybar
            pre = i <= nu_b
            disc[lo:hi] += (differ & pre).astype(np.int64)
            bad |= differ & ~pre
            x = x_stream[:, i - 1]
            _, y = kernel_step_many(x, y, x, xi)
            _, ybar = kernel_step_many(x, ybar, x, xi)
        violations += int(bad.sum())

    mean_nu = float(nu.sum()) / reps
    se = float(np.std(nu, ddof=1)) / np.sqrt(reps) if reps > 1 else 0.0
    diagnostics = {
        "xi": xi,
        "pathwise_violations": float(violations),
        "mean_pre_coupling_discrepancy": float(disc.sum()) / reps,
        "horizon": float(horizon),
    }
    for ell in range(1, tail_len + 1):
        emp = float(np.mean(nu > ell))
        theo = (1.0 - xi) ** ell
        band = _BAND_Z * np.sqrt(theo * (1.0 - theo) / reps)
        diagnostics[f"tail_{ell:02d}_empirical"] = emp
        diagnostics[f"tail_{ell:02d}_theoretical"] = theo
        diagnostics[f"tail_{ell:02d}_band"] = float(band)
    return EstimatorReport(
        method="replication",
        estimate=mean_nu,
        std_error=se,
        ci95=(mean_nu - 1.96 * se, mean_nu + 1.96 * se),
        reps_or_lags=reps,
        diagnostics=diagnostics,
    )


def coupling_report_dict(report) -> dict:
    """Shape the coupling report as {xi, reps, mean_nu, tail, ...} JSON."""
    d = report.diagnostics
    tail = []
    ell = 1
    while f"tail_{ell:02d}_empirical" in d:
        tail.append(
            {
                "ell": ell,
                "empirical": d[f"tail_{ell:02d}_empirical"],
                "theoretical": d[f"tail_{ell:02d}_theoretical"],
                "band": d[f"tail_{ell:02d}_band"],
            }
        )
        ell += 1
    return {
        "xi": d["xi"],
        "reps": report.reps_or_lags,
        "mean_nu": report.estimate,
        "mean_nu_se": report.std_error,
        "tail": tail,
        "pathwise_violations": int(d["pathwise_violations"]),
    }
