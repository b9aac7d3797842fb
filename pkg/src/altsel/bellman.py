"""Value functions, threshold functions, and their limits.

Implements the one-variable backward recursion

    v_k(y) = y v_{k-1}(y) + integral_y^1 max{v_{k-1}(y), 1 + v_{k-1}(1-x)} dx,

with v_0 = 0, on a uniform grid.  The max inside the integrand is resolved
exactly: the crossing point of the two maximands is located by inverting the
piecewise-linear table of v_{k-1}, which is simultaneously the acceptance
threshold

    g_k(y) = inf{x in [y, 1] : v_{k-1}(y) <= 1 + v_{k-1}(1-x)},

so each sweep produces the value row and the threshold row together and the
quadrature never integrates across a kink.

Also computed here: the minimal fixed points xi_k (the unique roots of
v_{k-1}(y) - v_{k-1}(1-y) = 1 for k >= 3), their limit xi, and the
value-function derivatives via the two-branch recursion that switches at
xi_k.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import BracketError, GridSpec, SampledFunction

__all__ = [
    "ValueTable",
    "ThresholdFamily",
    "DerivativeTable",
    "ConvergenceError",
    "CacheError",
    "compute_values",
    "compute_thresholds",
    "converge_xi",
    "compute_derivatives",
    "uniform_gap",
    "stationary_selection_rate",
    "save_value_table",
    "load_value_table",
    "cache_path",
    "load_or_compute_values",
    "write_threshold_csv",
]

ASYMPTOTIC_RATE = 2.0 - np.sqrt(2.0)


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed to reach the requested tolerance."""


class CacheError(IOError):
    """Value-table cache file is malformed or inconsistent."""


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True, eq=False)
class ValueTable:
    """Rows k = 0..horizon of v_k sampled on the grid (row 0 is zero)."""

    grid: GridSpec
    horizon: int
    matrix: np.ndarray  # shape (horizon + 1, grid.points)

    def __post_init__(self) -> None:
        expect = (self.horizon + 1, self.grid.points)
        if self.matrix.shape != expect:
            raise ValueError(f"value matrix shape {self.matrix.shape} != {expect}")
        if np.any(self.matrix[0] != 0.0):
            raise ValueError("v_0 must be identically zero")
        self.matrix.setflags(write=False)

    def fn(self, k: int) -> SampledFunction:
        flag = "decreasing" if k >= 1 else "none"
        return SampledFunction(self.grid, self.matrix[k], flag)

    def at_zero(self, k: int) -> float:
        return float(self.matrix[k, 0])


@dataclass(frozen=True, eq=False)
class ThresholdFamily:
    """Threshold rows g_1..g_horizon, minimal fixed points, and their limit.

    Row 0 of ``matrix`` holds the identity (a convenient sentinel; g_0 is
    never used).  ``xi[k]`` is the minimal fixed point of g_k (zero for
    k = 1, 2), and ``xi_limit`` is the limit returned by ``converge_xi``,
    resolved to ``xi_tol`` (limit-comparison checks must forgive that
    much).
    """

    grid: GridSpec
    horizon: int
    matrix: np.ndarray
    xi: np.ndarray
    xi_limit: float
    xi_tol: float = 0.0

    def __post_init__(self) -> None:
        expect = (self.horizon + 1, self.grid.points)
        if self.matrix.shape != expect:
            raise ValueError(f"threshold matrix shape {self.matrix.shape} != {expect}")
        if self.xi.shape != (self.horizon + 1,):
            raise ValueError("xi array must have one entry per k = 0..horizon")
        self.matrix.setflags(write=False)
        self.xi.setflags(write=False)

    def fn(self, k: int) -> SampledFunction:
        return SampledFunction(self.grid, self.matrix[k], "none")

    def limit_fn(self) -> SampledFunction:
        """The limiting threshold curve max(xi, y) on the grid."""
        return SampledFunction(
            self.grid, np.maximum(self.xi_limit, self.grid.x), "none"
        )


@dataclass(frozen=True, eq=False)
class DerivativeTable:
    """Rows k = 1..horizon of v'_k from the two-branch recursion."""

    grid: GridSpec
    horizon: int
    matrix: np.ndarray  # row 0 unused (zeros)

    def __post_init__(self) -> None:
        expect = (self.horizon + 1, self.grid.points)
        if self.matrix.shape != expect:
            raise ValueError(f"derivative matrix shape {self.matrix.shape} != {expect}")
        self.matrix.setflags(write=False)

    def fn(self, k: int) -> SampledFunction:
        return SampledFunction(self.grid, self.matrix[k], "none")


# ---------------------------------------------------------------------------
# core sweeps


def _invert_decreasing(x: np.ndarray, h: float, vals: np.ndarray,
                       targets: np.ndarray) -> np.ndarray:
    """Smallest w with piecewise-linear vals(w) <= target, per target.

    ``vals`` must be non-increasing.  Levels below the table minimum clamp
    to 1, levels above the maximum clamp to 0; in between the crossing is
    exact on the interpolant (no bisection needed on tabulated data).
    """
    n = len(vals)
    idx = np.searchsorted(vals[::-1], targets, side="left")
    j = np.clip(n - 1 - idx, 0, n - 2)
    denom = vals[j] - vals[j + 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(denom > 0.0, (vals[j] - targets) / denom, 0.0)
    w = x[j] + h * np.clip(frac, 0.0, 1.0)
    w = np.where(idx == 0, 1.0, w)
    w = np.where(idx == n, 0.0, w)
    return w


def _threshold_row(x: np.ndarray, h: float, v_prev: np.ndarray) -> np.ndarray:
    # g_k(y) = max(y, 1 - w) where v_{k-1}(w) = v_{k-1}(y) - 1
    w = _invert_decreasing(x, h, v_prev, v_prev - 1.0)
    return np.maximum(x, 1.0 - w)


def _tail_integrals(x: np.ndarray, h: float, w: np.ndarray,
                    a: np.ndarray) -> np.ndarray:
    # trapezoid integral of the table w over [a_i, 1], partial cell exact
    cells = 0.5 * h * (w[:-1] + w[1:])
    tail = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
    i = np.minimum((a / h).astype(np.int64), len(x) - 2)
    frac = a / h - i
    wa = w[i] * (1.0 - frac) + w[i + 1] * frac
    return tail[i + 1] + 0.5 * (x[i + 1] - a) * (wa + w[i + 1])


def _bellman_step(x: np.ndarray, h: float,
                  v_prev: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One backward-induction sweep: returns (v_k row, g_k row)."""
    g = _threshold_row(x, h, v_prev)
    integrand = 1.0 + v_prev[::-1]  # samples of x -> 1 + v_{k-1}(1 - x)
    v = g * v_prev + _tail_integrals(x, h, integrand, g)
    v[-1] = 0.0
    return v, g


def _xi_root(x: np.ndarray, h: float, v_prev: np.ndarray, k: int) -> float:
    """Unique root of v_{k-1}(y) - v_{k-1}(1-y) = 1 (valid for k >= 3)."""
    delta = v_prev - v_prev[::-1]
    if not delta[0] >= 1.0 >= delta[-1]:
        raise BracketError(
            f"fixed-point equation not bracketed at k={k}: "
            f"delta(0)={delta[0]}, delta(1)={delta[-1]} (grid too coarse?)"
        )
    return float(_invert_decreasing(x, h, delta, np.array([1.0]))[0])


# ---------------------------------------------------------------------------
# public operations


def compute_values(grid: GridSpec, n: int) -> ValueTable:
    """Tabulate v_1..v_n by backward induction on the given grid."""
    if n < 1:
        raise ValueError(f"horizon must be >= 1, got {n}")
    x, h = grid.x, grid.step
    matrix = np.zeros((n + 1, grid.points))
    for k in range(1, n + 1):
        matrix[k], _ = _bellman_step(x, h, matrix[k - 1])
    return ValueTable(grid, n, matrix)


def compute_thresholds(vt: ValueTable, tol_xi: float = 1e-6,
                       k_max: int = 20000) -> ThresholdFamily:
    """Tabulate g_1..g_horizon, the xi_k, and the limit xi.

    xi_k for k >= 3 comes from the fixed-point characterization
    v_{k-1}(y) - v_{k-1}(1-y) = 1 (cleaner at grid scale than scanning g_k
    for its first fixed point); xi_1 = xi_2 = 0.  The limit is produced by
    ``converge_xi`` on the same grid.
    """
    grid, n = vt.grid, vt.horizon
    x, h = grid.x, grid.step
    matrix = np.empty((n + 1, grid.points))
    matrix[0] = x
    xi = np.zeros(n + 1)
    for k in range(1, n + 1):
        matrix[k] = _threshold_row(x, h, vt.matrix[k - 1])
        if k >= 3:
            xi[k] = _xi_root(x, h, vt.matrix[k - 1], k)
    xi_limit, _ = converge_xi(grid, tol_xi, k_max=k_max)
    return ThresholdFamily(grid, n, matrix, xi, xi_limit, tol_xi)


def converge_xi(grid: GridSpec, tol_xi: float,
                k_max: int = 20000) -> tuple[float, int]:
    """Iterate the value recursion until xi_k stabilizes.

    Stops at the first k with xi_k - xi_{k-1} < tol_xi (the sequence is
    non-decreasing) and returns that xi_k with its index.
    """
    if tol_xi <= 0.0:
        raise ValueError(f"tol_xi must be positive, got {tol_xi}")
    x, h = grid.x, grid.step
    v_prev, _ = _bellman_step(x, h, np.zeros(grid.points))  # v_1
    xi_prev = 0.0  # xi_2 = xi_1 = 0
    k = 2
    while k < k_max:
        v_prev, _ = _bellman_step(x, h, v_prev)
        k += 1
        xi_k = _xi_root(x, h, v_prev, k)  # v_prev is now v_{k-1}
        if xi_k - xi_prev < tol_xi:
            return xi_k, k
        xi_prev = xi_k
    raise ConvergenceError(
        f"xi did not converge to {tol_xi} within {k_max} iterations "
        f"(tolerance may be below grid resolution h={h})"
    )


def compute_derivatives(vt: ValueTable, tf: ThresholdFamily) -> DerivativeTable:
    """Tabulate v'_1..v'_horizon by the two-branch recursion.

    v'_k = g_k v'_{k-1} below xi_k and
    v'_k = v_{k-1}(y) - 1 - v_{k-1}(1-y) + y v'_{k-1}(y) above, with
    v'_1 = -1.  The branches agree at xi_k.
    """
    if tf.grid is not vt.grid and (tf.grid.step != vt.grid.step
                                   or tf.grid.points != vt.grid.points):
        raise ValueError("value and threshold tables use different grids")
    if tf.horizon != vt.horizon:
        raise ValueError("value and threshold tables have different horizons")
    grid, n = vt.grid, vt.horizon
    x = grid.x
    matrix = np.zeros((n + 1, grid.points))
    matrix[1] = -1.0
    for k in range(2, n + 1):
        v_prev = vt.matrix[k - 1]
        dv_prev = matrix[k - 1]
        greedy = v_prev - 1.0 - v_prev[::-1] + x * dv_prev
        matrix[k] = np.where(x <= tf.xi[k], tf.matrix[k] * dv_prev, greedy)
    return DerivativeTable(grid, n, matrix)


def uniform_gap(tf: ThresholdFamily, k: int) -> float:
    """Sup-norm distance between g_k and the limit curve max(xi, y)."""
    if not 1 <= k <= tf.horizon:
        raise ValueError(f"k={k} outside 1..{tf.horizon}")
    limit = np.maximum(tf.xi_limit, tf.grid.x)
    return float(np.max(np.abs(tf.matrix[k] - limit)))


def stationary_selection_rate(xi: float) -> float:
    """Long-run acceptance rate of the stationary threshold policy.

    With the reduced state uniform on [0, 1 - xi], the acceptance
    probability is E[1 - max(xi, Y)] = (1/2 - xi^2) / (1 - xi).  Matching
    this to the known rate 2 - sqrt(2) pins the limiting threshold, so the
    identity doubles as an independent consistency check on the iteration.
    """
    return (0.5 - xi * xi) / (1.0 - xi)


# ---------------------------------------------------------------------------
# cache (little-endian: magic, version u32, h f64, n u32, then rows of f64)

_MAGIC = b"ALSQ"
_VERSION = 1


def cache_path(cache_dir: str | Path, step: float, n: int) -> Path:
    return Path(cache_dir) / f"values-h{step:g}-n{n}.alsq"


def save_value_table(vt: ValueTable, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = struct.pack("<4sIdI", _MAGIC, _VERSION, vt.grid.step, vt.horizon)
    body = np.ascontiguousarray(vt.matrix, dtype="<f8").tobytes()
    path.write_bytes(header + body)


def load_value_table(path: str | Path) -> ValueTable:
    raw = Path(path).read_bytes()
    head_size = struct.calcsize("<4sIdI")
    if len(raw) < head_size:
        raise CacheError(f"{path}: truncated header")
    magic, version, step, n = struct.unpack_from("<4sIdI", raw)
    if magic != _MAGIC:
        raise CacheError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise CacheError(f"{path}: unsupported version {version}")
    grid = GridSpec.from_step(step)
    expect = head_size + (n + 1) * grid.points * 8
    if len(raw) != expect:
        raise CacheError(f"{path}: size {len(raw)} != expected {expect}")
    matrix = np.frombuffer(raw, dtype="<f8", offset=head_size).astype(float)
    return ValueTable(grid, n, matrix.reshape(n + 1, grid.points))


def load_or_compute_values(grid: GridSpec, n: int,
                           cache_dir: str | Path | None) -> tuple[ValueTable, bool]:
    """Fetch the (h, n) table from cache or compute and store it.

    Returns (table, hit).  A cached table with a larger horizon is not
    reused: files are keyed by the exact (h, n) pair.
    """
    if cache_dir is None:
        return compute_values(grid, n), False
    path = cache_path(cache_dir, grid.step, n)
    if path.exists():
        vt = load_value_table(path)
        if vt.grid.points != grid.points:
            raise CacheError(f"{path}: grid mismatch")
        return vt, True
    vt = compute_values(grid, n)
    save_value_table(vt, path)
    return vt, False


# ---------------------------------------------------------------------------
# threshold-curve CSV (columns y, g_1..g_10, g_inf)


def write_threshold_csv(tf: ThresholdFamily, stream, y_max: float | None = 0.35,
                        k_count: int = 10) -> None:
    """Emit the threshold curves behind the k = 1..10 figure as RFC-4180 CSV.

    ``y_max`` restricts the rows (the figure uses [0, 0.35]); pass None for
    the full range.  The final column is the limit curve max(xi, y).
    """
    ks = list(range(1, min(k_count, tf.horizon) + 1))
    writer = csv.writer(stream, lineterminator="\r\n")
    writer.writerow(["y"] + [f"g_{k}" for k in ks] + ["g_inf"])
    x = tf.grid.x
    limit = np.maximum(tf.xi_limit, x)
    for j in range(tf.grid.points):
        if y_max is not None and x[j] > y_max + 1e-12:
            break
        row = [f"{x[j]:.12g}"]
        row += [f"{tf.matrix[k][j]:.12g}" for k in ks]
        row.append(f"{limit[j]:.12g}")
        writer.writerow(row)
