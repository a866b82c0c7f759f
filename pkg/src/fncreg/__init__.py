"""Sparse linear regression variable selection with false negative proportion control.

The pipeline fits a Lasso, debiases it with a nodewise-regression estimate of
the precision matrix, estimates the number of signals from the standardized
debiased statistics and picks the largest threshold whose estimated false
negative proportion stays below a target level.
"""

from .model import (
    DebiasedFit,
    Dataset,
    DecompositionCheck,
    Diagnostics,
    EvaluationMetrics,
    FnpCurve,
    GroundTruth,
    LassoFit,
    NodewiseResult,
    NullCalibration,
    SelectionResult,
    SignalEstimate,
    ValidationError,
)
from .lasso import ConvergenceWarning, default_lambda, fit_lasso, lambda_max, make_lambda_grid, select_lambda_cv
from .nodewise import DegenerateColumnError, default_lambda_node, nodewise_regression
from .debias import DegenerateSigmaError, debias, debiased_fit, decompose, estimate_sigma, omega_hat, standardize
from .fnp import (
    DegenerateStatisticError,
    FncRegConfig,
    FncRegFit,
    StageError,
    calibrate_null,
    null_statistics,
    diagnostics,
    estimate_pi_discretized,
    estimate_pi_orderstat,
    fnc_reg,
    fnp_curve,
    fnp_hat,
    run_fnc_reg,
    threshold_select,
    v_star_statistic,
    v_statistic,
)
from .simulate import ScenarioConfig, gen_design, gen_precision_er, gen_response, make_beta, simulate_replicate
from .metrics import MetricsSummary, aggregate, evaluate

__version__ = "0.1.0"
