"""On-line alternating-subsequence selection: DP engine and simulators.

The backward recursion for the one-variable value functions drives
everything else: threshold tables and their limit, policy simulation,
variance estimation for the selection count, chain-coupling experiments,
and a certification suite for the structural properties of the tables.
"""

from .bellman import (
    ASYMPTOTIC_RATE,
    DerivativeTable,
    ThresholdFamily,
    ValueTable,
    compute_derivatives,
    compute_thresholds,
    compute_values,
    converge_xi,
    load_value_table,
    save_value_table,
    stationary_selection_rate,
    uniform_gap,
)
from .chain import ChainState, CouplingOutcome, coupling_experiment, \
    kernel_step, stationary_sample
from .estimators import (
    CltDiagnostic,
    EstimatorReport,
    clt_diagnostic,
    estimate_sigma2_regenerative,
    estimate_sigma2_replication,
    estimate_sigma2_series,
    l2_closeness,
)
from .numerics import (
    GridSpec,
    SampledFunction,
    Tolerances,
    integrate_tail,
    solve_decreasing,
)
from .policies import PolicyKind, PolicyRun, mean_selection_check, \
    run_coupled, run_policy
from .verify import LemmaReport, certify_all, certify_figure1

__version__ = "0.1.0"

__all__ = [
    "ASYMPTOTIC_RATE",
    "ChainState",
    "CltDiagnostic",
    "CouplingOutcome",
    "DerivativeTable",
    "EstimatorReport",
    "GridSpec",
    "LemmaReport",
    "PolicyKind",
    "PolicyRun",
    "SampledFunction",
    "ThresholdFamily",
    "Tolerances",
    "ValueTable",
    "certify_all",
    "certify_figure1",
    "clt_diagnostic",
    "compute_derivatives",
    "compute_thresholds",
    "compute_values",
    "converge_xi",
    "coupling_experiment",
    "estimate_sigma2_regenerative",
    "estimate_sigma2_replication",
    "estimate_sigma2_series",
    "integrate_tail",
    "kernel_step",
    "l2_closeness",
    "load_value_table",
    "mean_selection_check",
    "run_coupled",
    "run_policy",
    "save_value_table",
    "solve_decreasing",
    "stationary_sample",
    "stationary_selection_rate",
    "uniform_gap",
    "__version__",
]
