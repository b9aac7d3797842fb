"""Grid discretization, interpolation, quadrature, and root finding.

Every tabulated function in this package lives on a uniform grid over [0, 1]
and is evaluated by linear interpolation.  This module fixes those
conventions once: the grid, the sampled-function container, tail quadrature
with an exactly-handled partial first cell, and bisection root location on
non-increasing interpolants.

Linear (rather than higher-order) interpolation is deliberate: it preserves
the monotonicity of decreasing tables, which the threshold root-finding
depends on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "GridSpec",
    "SampledFunction",
    "Tolerances",
    "DomainError",
    "BracketError",
    "integrate_tail",
    "solve_decreasing",
    "lipschitz_estimate",
    "ulp_slack",
]


class DomainError(ValueError):
    """Evaluation point outside [0, 1] beyond the allowed rounding slack."""


def ulp_slack(values: np.ndarray) -> float:
    """Roundoff allowance for monotonicity checks on computed tables.

    Where the true decrease of a table falls below the value's ulp (the
    value functions flatten geometrically fast near zero), adjacent entries
    can land a couple of ulps out of order; comparisons should forgive
    exactly that much and no more.
    """
    scale = max(1.0, float(np.max(np.abs(values))))
    return 64.0 * np.finfo(float).eps * scale


class BracketError(ValueError):
    """Root finding failed because the target level is not bracketed."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid x_j = j * step, j = 0..points-1, spanning [0, 1]."""

    step: float
    points: int

    def __post_init__(self) -> None:
        if not 0.0 < self.step < 1.0:
            raise ValueError(f"grid step must lie in (0, 1), got {self.step}")
        if self.points < 11:
            raise ValueError(f"grid needs at least 11 points, got {self.points}")
        span = self.step * (self.points - 1)
        if abs(span - 1.0) > 16.0 * np.finfo(float).eps * self.points:
            raise ValueError(
                f"step * (points - 1) = {span!r} does not cover [0, 1]"
            )

    @classmethod
    def from_step(cls, step: float) -> "GridSpec":
        """Build the grid for a spacing that divides [0, 1] evenly."""
        return cls(step=step, points=int(round(1.0 / step)) + 1)

    @cached_property
    def x(self) -> np.ndarray:
        """Grid nodes as a read-only array (endpoints exactly 0 and 1)."""
        nodes = np.linspace(0.0, 1.0, self.points)
        nodes.setflags(write=False)
        return nodes


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """A function tabulated on a grid, evaluated by linear interpolation.

    ``monotone_flag`` is "decreasing" when the table is known to be
    non-increasing (strict decrease is asserted separately where proved);
    "none" otherwise.
    """

    grid: GridSpec
    values: np.ndarray
    monotone_flag: str = "none"

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float, copy=True)
        if vals.shape != (self.grid.points,):
            raise ValueError(
                f"expected {self.grid.points} samples, got shape {vals.shape}"
            )
        if self.monotone_flag not in ("decreasing", "none"):
            raise ValueError(f"unknown monotone_flag {self.monotone_flag!r}")
        if (self.monotone_flag == "decreasing"
                and np.any(np.diff(vals) > ulp_slack(vals))):
            raise ValueError("values are not non-increasing")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __call__(self, y):
        """Interpolate at ``y`` (scalar or array); exact at grid nodes."""
        y = self._check_domain(y)
        out = np.interp(y, self.grid.x, self.values)
        return float(out) if np.ndim(out) == 0 else out

    def _check_domain(self, y):
        slack = 0.5 * self.grid.step
        y = np.asarray(y, dtype=float)
        if np.any(y < -slack) or np.any(y > 1.0 + slack):
            raise DomainError(f"evaluation point {y!r} outside [0, 1] (slack {slack})")
        return np.clip(y, 0.0, 1.0)

    @cached_property
    def _tail_cumulative(self) -> np.ndarray:
        # T[j] = trapezoid integral over [x_j, 1]
        h = self.grid.step
        cells = 0.5 * h * (self.values[:-1] + self.values[1:])
        tail = np.concatenate([np.cumsum(cells[::-1])[::-1], [0.0]])
        tail.setflags(write=False)
        return tail


@dataclass(frozen=True)
class Tolerances:
    """Comparison tolerances tied to the grid spacing.

    One order above the scheme's formal error to absorb constant factors;
    refining the grid tightens every check automatically.
    """

    values: float      # analytic value-function comparisons
    thresholds: float  # analytic threshold comparisons
    gap: float         # uniform-gap identities
    root: float        # bisection resolution

    @classmethod
    def from_step(cls, step: float) -> "Tolerances":
        return cls(
            values=10.0 * step * step,
            thresholds=10.0 * step,
            gap=3.0 * step,
            root=step / 10.0,
        )


def integrate_tail(f: SampledFunction, a: float) -> float:
    """Trapezoid approximation of the integral of ``f`` over [a, 1].

    The first (partial) cell is split exactly using the interpolated value
    at ``a``, so the result agrees with the trapezoid rule applied to the
    piecewise-linear interpolant itself.
    """
    if not -1e-12 <= a <= 1.0 + 1e-12:
        raise DomainError(f"lower limit {a} outside [0, 1]")
    a = min(max(a, 0.0), 1.0)
    grid = f.grid
    i = min(int(a / grid.step), grid.points - 2)
    x_next = grid.x[i + 1]
    frac = a / grid.step - i
    fa = f.values[i] * (1.0 - frac) + f.values[i + 1] * frac
    partial = 0.5 * (x_next - a) * (fa + f.values[i + 1])
    return float(f._tail_cumulative[i + 1] + partial)


def solve_decreasing(
    f: SampledFunction,
    target: float,
    lo: float,
    hi: float,
    tol_root: float | None = None,
) -> float:
    """Smallest y in [lo, hi] with interpolated f(y) <= target.

    Requires the interpolant to be non-increasing on [lo, hi] with
    f(lo) >= target >= f(hi) (equalities allowed).  Located by bisection to
    ``tol_root`` (default: grid.step / 10).  Returns ``lo`` immediately when
    f(lo) <= target.
    """
    if tol_root is None:
        tol_root = f.grid.step / 10.0
    f_lo = f(lo)
    if f_lo <= target:
        return lo
    f_hi = f(hi)
    if f_hi > target:
        raise BracketError(
            f"target {target} not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}"
        )
    a, b = lo, hi  # invariant: f(a) > target >= f(b)
    while b - a > tol_root:
        mid = 0.5 * (a + b)
        if f(mid) <= target:
            b = mid
        else:
            a = mid
    return b


def lipschitz_estimate(f: SampledFunction) -> float:
    """Largest slope magnitude of the interpolant."""
    return float(np.max(np.abs(np.diff(f.values)))) / f.grid.step
