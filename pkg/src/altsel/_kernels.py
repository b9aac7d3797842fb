"""Numba kernels for policy simulation.

All kernels consume pre-drawn uniform matrices (one row per replication) and
write one slot per replication, so results are bit-identical regardless of
thread count or batching.  State recursion in every kernel: select when
x >= threshold (weak inequality), then the state becomes 1 - x.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, inline="always")
def _interp_row(row, inv_h, y):
    # linear interpolation of one tabulated threshold row at y in [0, 1]
    pos = y * inv_h
    j = int(pos)
    if j >= row.shape[0] - 1:
        return row[row.shape[0] - 1]
    frac = pos - j
    return row[j] * (1.0 - frac) + row[j + 1] * frac


@njit(parallel=True, cache=True)
def threshold_counts(u, level):
    """Stationary threshold policy max(level, y): counts and final states."""
    reps, n = u.shape
    counts = np.empty(reps, np.int64)
    final = np.empty(reps, np.float64)
    for r in prange(reps):
        y = 0.0
        c = 0
        for i in range(n):
            x = u[r, i]
            t = level if level > y else y
            if x >= t:
                y = 1.0 - x
                c += 1
        counts[r] = c
        final[r] = y
    return counts, final


@njit(parallel=True, cache=True)
def optimal_counts(u, g, inv_h, horizon, steps):
    """Finite-horizon optimal policy over the first ``steps`` of ``horizon``.

    Threshold at step i (1-based) is g_{horizon - i + 1} interpolated at the
    current state; rows beyond the table clamp to the last (converged) row.
    """
    reps = u.shape[0]
    rows = g.shape[0]
    counts = np.empty(reps, np.int64)
    final = np.empty(reps, np.float64)
    for r in prange(reps):
        y = 0.0
        c = 0
        for i in range(steps):
            k = horizon - i
            if k > rows - 1:
                k = rows - 1
            x = u[r, i]
            t = _interp_row(g[k], inv_h, y)
            if x >= t:
                y = 1.0 - x
                c += 1
        counts[r] = c
        final[r] = y
    return counts, final


@njit(parallel=True, cache=True)
def coupled_counts(u, g, inv_h, xi, horizon, steps):
    """Optimal and stationary policies driven by identical uniforms."""
    reps = u.shape[0]
    rows = g.shape[0]
    c_opt = np.empty(reps, np.int64)
    c_lim = np.empty(reps, np.int64)
    for r in prange(reps):
        y_opt = 0.0
        y_lim = 0.0
        a = 0
        b = 0
        for i in range(steps):
            x = u[r, i]
            k = horizon - i
            if k > rows - 1:
                k = rows - 1
            t = _interp_row(g[k], inv_h, y_opt)
            if x >= t:
                y_opt = 1.0 - x
                a += 1
            t = xi if xi > y_lim else y_lim
            if x >= t:
                y_lim = 1.0 - x
                b += 1
        c_opt[r] = a
        c_lim[r] = b
    return c_opt, c_lim


@njit(cache=True)
def threshold_path(u, level):
    """Single stationary-policy trajectory: per-step selection flags."""
    n = u.shape[0]
    sel = np.zeros(n, np.bool_)
    y = 0.0
    for i in range(n):
        t = level if level > y else y
        if u[i] >= t:
            sel[i] = True
            y = 1.0 - u[i]
    return sel
