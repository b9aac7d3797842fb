"""Grid, interpolation, quadrature, and root-finding primitives."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altsel.numerics import (
    BracketError,
    DomainError,
    GridSpec,
    SampledFunction,
    Tolerances,
    integrate_tail,
    lipschitz_estimate,
    solve_decreasing,
)

H = 1e-3
GRID = GridSpec.from_step(H)
TOL = Tolerances.from_step(H)


def table(fn, grid=GRID, flag="none"):
    return SampledFunction(grid, fn(grid.x), flag)


V1 = table(lambda x: 1.0 - x, flag="decreasing")
V2 = table(lambda x: 1.5 * (1.0 - x ** 2), flag="decreasing")
IDENT = table(lambda x: x)


class TestGridSpec:
    def test_from_step(self):
        assert GRID.points == 1001
        assert GRID.x[0] == 0.0 and GRID.x[-1] == 1.0
        assert GRID.x[500] == pytest.approx(0.5, abs=1e-15)

    def test_span_invariant(self):
        with pytest.raises(ValueError):
            GridSpec(step=1e-3, points=999)

    def test_minimum_points(self):
        with pytest.raises(ValueError):
            GridSpec(step=0.2, points=6)

    def test_grid_is_read_only(self):
        with pytest.raises(ValueError):
            GRID.x[0] = 1.0


class TestSampledFunction:
    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            SampledFunction(GRID, np.zeros(5))

    def test_monotone_flag_enforced(self):
        with pytest.raises(ValueError):
            SampledFunction(GRID, GRID.x, "decreasing")

    def test_eval_v1_midpoint(self):
        assert V1(0.5) == pytest.approx(0.5, abs=1e-15)

    def test_eval_exact_at_nodes(self):
        nodes = GRID.x[::37]
        assert np.array_equal(IDENT(nodes), nodes)

    def test_eval_v2_off_grid(self):
        # quadratic through linear interpolation: error at most h^2
        assert V2(0.25) == pytest.approx(1.5 * (1 - 0.0625), abs=H * H)

    def test_domain_error_beyond_slack(self):
        with pytest.raises(DomainError):
            V1(1.0 + H)
        assert V1(1.0 + 0.4 * H) == pytest.approx(0.0, abs=1e-12)

    @given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    @settings(max_examples=50, deadline=None)
    def test_eval_monotone_when_flagged(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert V2(lo) >= V2(hi) - 1e-12


class TestIntegrateTail:
    def test_constant(self):
        one = table(lambda x: np.ones_like(x))
        assert integrate_tail(one, 0.25) == pytest.approx(0.75, abs=1e-12)

    def test_identity_exact(self):
        # trapezoid is exact on affine integrands
        assert integrate_tail(IDENT, 0.0) == pytest.approx(0.5, abs=1e-12)

    def test_square_against_antiderivative(self):
        sq = table(lambda x: x ** 2)
        # oracle: integral of x^2 over [a, 1] = (1 - a^3) / 3
        for a in (0.0, 0.123, 0.5, 0.9995):
            exact = (1.0 - a ** 3) / 3.0
            assert integrate_tail(sq, a) == pytest.approx(exact, abs=H * H)

    def test_domain_error(self):
        with pytest.raises(DomainError):
            integrate_tail(V1, -0.1)

    @given(st.floats(0.0, 1.0))
    @settings(max_examples=50, deadline=None)
    def test_additivity(self, a):
        # full integral minus tail must equal an independently assembled
        # trapezoid head (same rule, built from scratch)
        full = integrate_tail(V2, 0.0)
        tail = integrate_tail(V2, a)
        i = min(int(a / H), GRID.points - 2)
        head = np.trapezoid(V2.values[: i + 1], dx=H)
        frac = a / H - i
        fa = V2.values[i] * (1.0 - frac) + V2.values[i + 1] * frac
        head += 0.5 * (a - GRID.x[i]) * (V2.values[i] + fa)
        assert full - tail == pytest.approx(head, abs=1e-12 * (i + 2))


class TestSolveDecreasing:
    def test_linear_root(self):
        y = solve_decreasing(V1, 0.6, 0.0, 1.0)
        assert y == pytest.approx(0.4, abs=TOL.root)

    def test_quadratic_root_against_algebra(self):
        # oracle: solve 1.5 (1 - y^2) = 1 exactly
        y = solve_decreasing(V2, 1.0, 0.0, 1.0)
        assert y == pytest.approx(np.sqrt(1.0 / 3.0), abs=TOL.root)

    def test_boundary_target(self):
        assert solve_decreasing(V2, V2(0.0), 0.0, 1.0) == 0.0

    def test_bracket_error(self):
        with pytest.raises(BracketError):
            solve_decreasing(V2, -0.5, 0.0, 0.5)

    @given(st.floats(0.05, 1.45))
    @settings(max_examples=50, deadline=None)
    def test_residual_bounded_by_lipschitz(self, target):
        y = solve_decreasing(V2, target, 0.0, 1.0)
        bound = lipschitz_estimate(V2) * TOL.root
        if 0.0 < y < 1.0:
            assert abs(V2(y) - target) <= bound + 1e-12


class TestTolerances:
    def test_scaling(self):
        t = Tolerances.from_step(1e-4)
        assert t.values == pytest.approx(1e-7)
        assert t.thresholds == pytest.approx(1e-3)
        assert t.gap == pytest.approx(3e-4)
        assert t.root == pytest.approx(1e-5)
