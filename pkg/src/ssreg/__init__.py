"""Semi-supervised inference for one regression coefficient in high dimensions."""

from .dataset import CenteringInfo, SemiSupervisedDataset, SplitPlan, center, load_csv, make_split, write_csv
from .errors import (
    ConvergenceError,
    DegenerateError,
    FeasibilityError,
    InputError,
    LoadError,
    SSRegError,
)
from .estimators import (
    ESTIMATORS,
    EstimateReport,
    EstimatorConfig,
    dfa,
    dr,
    lasso_coefficient,
    plug_in_theta,
    select_lambda,
    sr,
    ss_dfa,
    ss_dr,
    ss_sr,
    ss_sr_modified,
)
from .harness import ExperimentPlan, PowerCurve, SummaryTable, emit, power_curve, run_power, run_table
from .simgen import GeneratedInstance, ScenarioSpec, generate, true_theta
from .solvers import SolverConfig, SolverResult
from .tuning import CrossValidated, FeasibilityPath, Fixed

__version__ = "0.1.0"
