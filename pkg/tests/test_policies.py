"""Policy execution: hand traces, invariants, kernel/reference agreement."""

import io

import numpy as np
import pytest

from altsel import rng
from altsel.policies import (
    PolicyKind,
    StreamExhausted,
    mean_selection_check,
    run_coupled,
    run_policy,
    sample_coupled_counts,
    sample_selection_counts,
    write_trace_csv,
)

XI = 1.0 - 1.0 / np.sqrt(2.0)


class TestPolicyKind:
    def test_limit_range_validation(self):
        with pytest.raises(ValueError):
            PolicyKind.limit(0.4)
        with pytest.raises(ValueError):
            PolicyKind.fixed_threshold(-0.01)

    def test_optimal_horizon_validation(self, tf_mid):
        with pytest.raises(ValueError):
            PolicyKind.optimal(tf_mid, tf_mid.horizon + 1)


class TestRunPolicy:
    def test_limit_hand_trace(self):
        # x = 0.9 clears xi, state moves to 0.1; 0.9 clears max(xi, 0.1) too
        run = run_policy(PolicyKind.limit(XI), [0.9, 0.9])
        assert run.selections == 2
        assert run.final_state == pytest.approx(0.1)

    def test_optimal_single_step_always_selects(self, tf_mid):
        for x in (0.0, 0.37, 0.999):
            run = run_policy(PolicyKind.optimal(tf_mid, 1), [x])
            assert run.selections == 1

    def test_limit_nothing_clears(self):
        run = run_policy(PolicyKind.limit(XI), [0.1, 0.2, 0.25])
        assert run.selections == 0
        assert run.final_state == 0.0

    def test_stream_exhaustion(self, tf_mid):
        with pytest.raises(StreamExhausted):
            run_policy(PolicyKind.optimal(tf_mid, 5), [0.5, 0.5])

    def test_generator_stream_accepted(self):
        run = run_policy(PolicyKind.limit(XI), (x / 10 for x in range(1, 10)))
        assert run.n == 9

    def test_selection_count_bounds(self):
        u = rng.stream(1, rng.POLICY, 0).random(500)
        run = run_policy(PolicyKind.limit(XI), u)
        assert int(np.sum(u >= 5.0 / 6.0)) <= run.selections <= 500

    def test_limit_state_space(self):
        for index in range(5):
            u = rng.stream(2, rng.POLICY, index).random(300)
            run = run_policy(PolicyKind.limit(XI), u, record_path=True)
            states = np.array([step[4] for step in run.path])
            assert np.all(states <= 1.0 - XI + 1e-12)

    def test_fixed_threshold_is_bernoulli_at_n1(self):
        c = 0.25
        kind = PolicyKind.fixed_threshold(c)
        assert run_policy(kind, [c]).selections == 1  # weak inequality
        assert run_policy(kind, [c - 1e-9]).selections == 0

    def test_path_recording_matches_summary(self, tf_mid):
        u = rng.stream(3, rng.POLICY, 7).random(50)
        run = run_policy(PolicyKind.optimal(tf_mid, 50), u, record_path=True)
        assert len(run.path) == 50
        assert sum(1 for s in run.path if s[3]) == run.selections
        assert run.path[-1][4] == run.final_state


class TestRenewalCoupling:
    def test_states_agree_after_high_observation(self, tf_mid):
        # while thresholds stay in [1/6, 1/3] (every step but the greedy
        # last two), an observation >= 5/6 beats both thresholds, is
        # selected by both policies, and leaves both states equal to 1 - x;
        # equality then persists until their thresholds next disagree on a
        # selection
        n = 48
        for index in range(10):
            u = rng.stream(11, rng.POLICY, index).random(n)
            opt, lim = run_coupled(tf_mid, XI, n, u, record_path=True)
            for step_o, step_l in zip(opt.path[: n - 2], lim.path[: n - 2]):
                x = step_o[1]
                if x >= 5.0 / 6.0:
                    assert step_o[3] and step_l[3]
                    assert step_o[4] == step_l[4] == 1.0 - x

    def test_all_renewals_selected_by_both(self, tf_mid):
        u = np.full(12, 0.9)
        opt, lim = run_coupled(tf_mid, XI, 12, u)
        assert opt.selections == lim.selections == 12

    def test_single_step_bounds(self, tf_mid):
        u = rng.stream(12, rng.POLICY, 0).random(1)
        opt, lim = run_coupled(tf_mid, XI, 1, u)
        assert opt.selections in (0, 1) and lim.selections in (0, 1)


class TestKernelsAgainstReference:
    """The numba kernels and the plain-python runner must agree exactly."""

    def test_limit_kernel(self):
        kind = PolicyKind.limit(XI)
        counts = sample_selection_counts(kind, 200, 8, seed=99)
        for r in range(8):
            u = rng.stream(99, rng.POLICY, r).random(200)
            assert run_policy(kind, u).selections == counts[r]

    def test_optimal_kernel(self, tf_mid):
        kind = PolicyKind.optimal(tf_mid, 50)
        counts = sample_selection_counts(kind, 50, 8, seed=21)
        for r in range(8):
            u = rng.stream(21, rng.POLICY, r).random(50)
            assert run_policy(kind, u).selections == counts[r]

    def test_coupled_kernel(self, tf_mid):
        c_opt, c_lim = sample_coupled_counts(tf_mid, XI, 40, 8, seed=5)
        for r in range(8):
            u = rng.stream(5, rng.CLOSENESS, r).random(40)
            opt, lim = run_coupled(tf_mid, XI, 40, u)
            assert (opt.selections, lim.selections) == (c_opt[r], c_lim[r])

    def test_batching_invariance(self):
        kind = PolicyKind.limit(XI)
        a = sample_selection_counts(kind, 100, 300, seed=4)
        import altsel.policies as pol
        old = pol._BATCH_ROWS
        try:
            pol._BATCH_ROWS = 64
            b = sample_selection_counts(kind, 100, 300, seed=4)
        finally:
            pol._BATCH_ROWS = old
        assert np.array_equal(a, b)


class TestMeanSelectionCheck:
    def test_n1_exact(self, tf_mid, vt_mid):
        report = mean_selection_check(tf_mid, 1, 500, seed=8, vt=vt_mid)
        assert report.estimate == 1.0
        assert report.diagnostics["dp_value"] == pytest.approx(1.0, abs=1e-12)

    def test_n2_within_three_se(self, tf_mid, vt_mid):
        report = mean_selection_check(tf_mid, 2, 20000, seed=8, vt=vt_mid)
        assert abs(report.estimate - 1.5) <= 3.0 * report.std_error

    def test_determinism(self, tf_mid, vt_mid):
        a = mean_selection_check(tf_mid, 5, 2000, seed=123, vt=vt_mid)
        b = mean_selection_check(tf_mid, 5, 2000, seed=123, vt=vt_mid)
        assert a.estimate == b.estimate and a.std_error == b.std_error

    def test_reps_validation(self, tf_mid):
        with pytest.raises(ValueError):
            mean_selection_check(tf_mid, 2, 10, seed=1)


def test_trace_csv(tf_mid):
    run = run_policy(PolicyKind.limit(XI), [0.9, 0.2, 0.95], record_path=True)
    buf = io.StringIO()
    write_trace_csv(run, buf)
    lines = buf.getvalue().strip().split("\r\n")
    assert lines[0] == "i,x,threshold,selected,y"
    assert len(lines) == 4
    assert lines[1].startswith("1,0.9,")
