"""Certification suite: every structural claim passes on honest tables."""

import json

import numpy as np
import pytest

from altsel.bellman import (
    compute_derivatives,
    compute_thresholds,
    compute_values,
)
from altsel.numerics import GridSpec
from altsel.verify import (
    LemmaReport,
    certify_all,
    certify_figure1,
    render_text,
    reports_json,
)

EXPECTED_CLAIMS = {
    "derivative-fd-crosscheck",
    "derivative-monotonicity",
    "diminishing-returns-1",
    "diminishing-returns-2",
    "fixed-point-characterization",
    "fixed-point-monotone",
    "fixed-point-range",
    "limit-approach-from-below",
    "limit-uniform-rate",
    "threshold-diagonal-range",
    "threshold-lipschitz",
    "threshold-lower-bound",
    "threshold-monotone-in-k",
    "value-boundary-zero",
    "value-monotone-in-horizon",
    "value-strict-decrease",
}


@pytest.fixture(scope="module")
def reports(vt_mid, tf_mid, dt_mid):
    return certify_all(vt_mid, tf_mid, dt_mid)


class TestCertifyAll:
    def test_every_claim_present_and_sorted(self, reports):
        ids = [r.lemma_id for r in reports]
        assert set(ids) == EXPECTED_CLAIMS
        assert ids == sorted(ids)

    def test_all_pass_at_default_grid(self, reports):
        failed = [r.lemma_id for r in reports if not r.passed]
        assert failed == []

    def test_violations_within_value_tolerance(self, reports, grid_mid):
        bound = 10.0 * grid_mid.step ** 2
        for r in reports:
            assert r.worst_violation >= -bound, r.lemma_id

    def test_report_invariant(self, reports):
        for r in reports:
            assert r.passed == (r.worst_violation >= -r.tolerance_used)

    def test_locations_are_descriptive(self, reports):
        for r in reports:
            assert r.worst_location


class TestRefinementStability:
    def test_coarse_to_mid_flips_nothing(self, reports):
        grid = GridSpec.from_step(1e-2)
        vt = compute_values(grid, 50)
        tf = compute_thresholds(vt, tol_xi=1e-5)
        dt = compute_derivatives(vt, tf)
        coarse = {r.lemma_id: r.passed for r in certify_all(vt, tf, dt)}
        fine = {r.lemma_id: r.passed for r in reports}
        assert coarse == fine


class TestFigure1:
    def test_geometry_passes(self, tf_mid):
        report = certify_figure1(tf_mid)
        assert report.passed

    def test_diagonal_contact_for_k3(self, tf_mid, grid_mid):
        # g_3 meets the diagonal at 1/6 and rides it afterwards
        x = grid_mid.x
        on = x >= 1.0 / 6.0
        assert np.max(np.abs(tf_mid.matrix[3][on] - x[on])) <= 2 * grid_mid.step
        j = int(0.1 / grid_mid.step)
        assert tf_mid.matrix[3][j] > x[j] + 0.05

    def test_first_two_curves_on_diagonal(self, tf_mid, grid_mid):
        assert np.max(np.abs(tf_mid.matrix[1] - grid_mid.x)) <= 1e-12
        assert np.max(np.abs(tf_mid.matrix[2] - grid_mid.x)) <= 1e-12

    def test_limit_curve_shape(self, tf_mid, grid_mid):
        limit = tf_mid.limit_fn().values
        x = grid_mid.x
        assert np.all(limit[x <= tf_mid.xi_limit] == tf_mid.xi_limit)
        assert np.array_equal(limit[x >= tf_mid.xi_limit],
                              x[x >= tf_mid.xi_limit])

    def test_needs_ten_curves(self, grid_coarse):
        vt = compute_values(grid_coarse, 5)
        tf = compute_thresholds(vt, tol_xi=0.4)
        with pytest.raises(ValueError):
            certify_figure1(tf)


class TestRendering:
    def test_text_table(self, reports):
        text = render_text(reports)
        assert text.count("\n") == len(reports) - 1
        assert "PASS" in text

    def test_json_roundtrip(self, reports):
        payload = json.loads(reports_json(reports))
        assert len(payload) == len(reports)
        assert all(row["passed"] for row in payload)

    def test_inconsistent_report_rejected(self):
        with pytest.raises(ValueError):
            LemmaReport("x", True, -1.0, "y", 0.0)
