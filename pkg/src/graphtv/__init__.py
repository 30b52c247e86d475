"""Graph total-variation IPM two-sample testing.

Exact computation of the graph TV integral probability metric over
geometric graphs via parametric min-cut, permutation-calibrated
hypothesis tests (two-sample, binned, chi-squared baseline, goodness of
fit, regression residuals), scikit-learn style estimators, and a
simulation/power harness.
"""

from .data import TwoSample, build_two_sample
from .estimators import (
    BinnedChiSquaredTest,
    BinnedGraphTVTest,
    GoodnessOfFitTest,
    GraphTVTest,
    RegressionResidualTest,
)
from .exceptions import (
    BinningMismatch,
    DimensionMismatch,
    EmptySample,
    GraphDisconnected,
    GraphTVError,
    KTooLarge,
    OutOfDomain,
    TooLarge,
)
from .graphs import (
    Binning,
    Graph,
    bin_partition,
    binned_assignment,
    default_radius,
    eps_graph,
    is_connected,
    knn_graph,
    torus_graph,
)
from .inference import (
    GraphSpec,
    PermutationPlan,
    TestReport,
    binned_graph_tv_stat,
    binned_graph_tv_test,
    chi_squared_stat,
    chi_squared_test,
    gof_test,
    permutation_p_value,
    permutation_test,
    regression_test,
)
from .maxflow import CutResult, FlowNetwork, lambda_cut, max_flow
from .simulate import (
    LocalizedAlternative,
    StatMethod,
    StudyConfig,
    roc_auc,
    run_power_study,
    sample_illustrative,
    sample_localized,
)
from .solver import (
    Diagnostics,
    GtvResult,
    WeightedSolver,
    brute_force_gtv,
    brute_force_weighted,
    diagnostics,
    graph_tv,
    halfspace_tv_constant,
    ratio,
    rescaled_statistic,
    solve_gtv_ipm,
    solve_weighted,
)

__version__ = "0.1.0"

__all__ = [
    "TwoSample",
    "build_two_sample",
    "GraphTVTest",
    "BinnedGraphTVTest",
    "BinnedChiSquaredTest",
    "GoodnessOfFitTest",
    "RegressionResidualTest",
    "GraphTVError",
    "DimensionMismatch",
    "EmptySample",
    "KTooLarge",
    "OutOfDomain",
    "BinningMismatch",
    "GraphDisconnected",
    "TooLarge",
    "Graph",
    "Binning",
    "eps_graph",
    "knn_graph",
    "default_radius",
    "is_connected",
    "bin_partition",
    "torus_graph",
    "binned_assignment",
    "GraphSpec",
    "PermutationPlan",
    "TestReport",
    "permutation_p_value",
    "permutation_test",
    "chi_squared_stat",
    "chi_squared_test",
    "binned_graph_tv_stat",
    "binned_graph_tv_test",
    "gof_test",
    "regression_test",
    "FlowNetwork",
    "CutResult",
    "max_flow",
    "lambda_cut",
    "LocalizedAlternative",
    "StatMethod",
    "StudyConfig",
    "sample_localized",
    "sample_illustrative",
    "roc_auc",
    "run_power_study",
    "GtvResult",
    "Diagnostics",
    "WeightedSolver",
    "graph_tv",
    "ratio",
    "solve_gtv_ipm",
    "solve_weighted",
    "brute_force_gtv",
    "brute_force_weighted",
    "diagnostics",
    "halfspace_tv_constant",
    "rescaled_statistic",
    "__version__",
]
