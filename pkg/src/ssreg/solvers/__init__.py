from .base import SolverConfig, SolverResult
from .dantzig import dantzig_two_constraint
from .lasso import critical_penalty, lasso_fit, lasso_path
from .qp import min_feasible_bound, min_quadratic_linf, min_quadratic_linf_capped

__all__ = [
    "SolverConfig",
    "SolverResult",
    "critical_penalty",
    "dantzig_two_constraint",
    "lasso_fit",
    "lasso_path",
    "min_feasible_bound",
    "min_quadratic_linf",
    "min_quadratic_linf_capped",
]
