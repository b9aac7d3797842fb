"""Chain kernel, stationarity, and the coupling-time experiment."""

import numpy as np
import pytest

from altsel.chain import (
    ChainState,
    CouplingOutcome,
    couple_once,
    coupling_experiment,
    coupling_report_dict,
    kernel_step,
    kernel_step_many,
    push_stationary,
    stationary_sample,
)
from altsel import rng
from altsel.stats import (ks_critical, ks_critical_two_sample, ks_two_sample,
                          ks_uniform)

XI = 1.0 - 1.0 / np.sqrt(2.0)


class TestKernelStep:
    def test_selection_branch(self):
        z = kernel_step(ChainState(0.9, 0.2), 0.5, XI)
        assert z.x == 0.5
        assert z.y == pytest.approx(0.1)

    def test_rejection_branch(self):
        z = kernel_step(ChainState(0.1, 0.2), 0.5, XI)
        assert z == ChainState(0.5, 0.2)

    def test_tie_selects(self):
        # weak inequality at the threshold
        z = kernel_step(ChainState(0.3, 0.3), 0.5, XI)
        assert z.y == pytest.approx(0.7)

    def test_output_stays_in_state_space(self):
        states = stationary_sample(5000, XI, seed=3)
        u = rng.stream(3, rng.CHAIN, 1).random(5000)
        _, ys = kernel_step_many(states[:, 0], states[:, 1], u, XI)
        assert np.all(ys <= 1.0 - XI + 1e-12) and np.all(ys >= 0.0)


class TestStationarySample:
    def test_means(self):
        draws = stationary_sample(100_000, XI, seed=5)
        se_x = 1.0 / np.sqrt(12.0 * 100_000)
        se_y = (1.0 - XI) / np.sqrt(12.0 * 100_000)
        assert abs(draws[:, 0].mean() - 0.5) <= 3.0 * se_x
        # oracle: uniform mean on [0, 1-xi]
        assert abs(draws[:, 1].mean() - (1.0 - XI) / 2.0) <= 3.0 * se_y

    def test_marginals_uniform(self):
        draws = stationary_sample(100_000, XI, seed=6)
        crit = ks_critical(100_000, 0.01)
        assert ks_uniform(draws[:, 0]) < crit
        assert ks_uniform(draws[:, 1], 0.0, 1.0 - XI) < crit

    def test_one_step_preserves_marginals(self):
        draws = stationary_sample(100_000, XI, seed=7)
        pushed = push_stationary(draws, 1, XI, seed=7)
        crit = ks_critical(100_000, 0.01)
        assert ks_uniform(pushed[:, 0]) < crit
        assert ks_uniform(pushed[:, 1], 0.0, 1.0 - XI) < crit

    def test_one_step_two_sample_ks_against_fresh_draw(self):
        draws = stationary_sample(100_000, XI, seed=9)
        pushed = push_stationary(draws, 1, XI, seed=9, index=30)
        fresh = stationary_sample(100_000, XI, seed=9, index=31)
        crit = ks_critical_two_sample(100_000, 100_000, 0.01)
        assert ks_two_sample(pushed[:, 1], fresh[:, 1]) < crit
        assert ks_two_sample(pushed[:, 0], fresh[:, 0]) < crit

    @pytest.mark.parametrize("m", [1, 5, 25])
    def test_multi_step_stationarity(self, m):
        draws = stationary_sample(100_000, XI, seed=8)
        pushed = push_stationary(draws, m, XI, seed=8, index=2 + m)
        crit = ks_critical(100_000, 0.01)
        assert ks_uniform(pushed[:, 0]) < crit
        assert ks_uniform(pushed[:, 1], 0.0, 1.0 - XI) < crit

    def test_count_validation(self):
        with pytest.raises(ValueError):
            stationary_sample(0, XI, seed=1)


class TestCoupleOnce:
    def test_reference_path(self):
        u = np.array([0.2, 0.5, 0.8])  # 0.8 >= 1 - xi ~ 0.7071
        out = couple_once(0.0, XI, u, ybar0=0.5)
        assert out.coupling_time == 3
        assert out.pre_coupling_discrepancy >= 1

    def test_insufficient_stream(self):
        with pytest.raises(ValueError):
            couple_once(0.0, XI, np.array([0.1, 0.2]), ybar0=0.4)

    def test_outcome_validation(self):
        with pytest.raises(ValueError):
            CouplingOutcome(0, 0)


class TestCouplingExperiment:
    @pytest.fixture(scope="class")
    def report(self):
        return coupling_experiment(ChainState(0.0, 0.0), 50_000, XI, seed=13)

    def test_mean_is_geometric(self, report):
        # oracle: nu ~ Geometric(xi), mean 1/xi
        assert abs(report.estimate - 1.0 / XI) <= 3.0 * report.std_error

    def test_one_step_tail(self, report):
        d = report.diagnostics
        emp = d["tail_01_empirical"]
        se = np.sqrt((1.0 - XI) * XI / 50_000)
        assert abs(emp - (1.0 - XI)) <= 3.0 * se

    def test_tails_within_bands(self, report):
        body = coupling_report_dict(report)
        for row in body["tail"]:
            assert abs(row["empirical"] - row["theoretical"]) <= row["band"]

    def test_no_pathwise_violations(self, report):
        assert report.diagnostics["pathwise_violations"] == 0.0

    def test_report_shape(self, report):
        body = coupling_report_dict(report)
        assert set(body) == {"xi", "reps", "mean_nu", "mean_nu_se", "tail",
                             "pathwise_violations"}
        assert len(body["tail"]) == 20

    def test_determinism(self):
        a = coupling_experiment(ChainState(0.0, 0.1), 2000, XI, seed=42)
        b = coupling_experiment(ChainState(0.0, 0.1), 2000, XI, seed=42)
        assert a.estimate == b.estimate
        assert a.diagnostics == b.diagnostics

    def test_initial_state_validated(self):
        with pytest.raises(ValueError):
            coupling_experiment(ChainState(0.0, 0.9), 100, XI, seed=1)


class TestAbsorption:
    def test_distinct_starts_merge_at_first_high_uniform(self):
        # two chains from arbitrary distinct starts, sharing uniforms, have
        # equal reduced states from the first index with X >= 1 - xi on
        u = rng.stream(17, rng.CHAIN, 500).random(200)
        for y0a, y0b in [(0.0, 0.7), (0.3, 0.05), (0.69, 0.1)]:
            ya, yb = y0a, y0b
            merged = False
            for i, x in enumerate(u, start=1):
                if x >= 1.0 - XI:
                    merged = True
                ya = 1.0 - x if x >= max(XI, ya) else ya
                yb = 1.0 - x if x >= max(XI, yb) else yb
                if merged:
                    assert ya == yb
