"""Semi-supervised estimators of the coefficient on Z and their intervals.

Every estimator is a pure function ``f(dataset, config) -> EstimateReport``.
Data are used as given: the simulation designs are mean-zero already and
real data should go through :func:`ssreg.dataset.center` first.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from statistics import NormalDist

import numpy as np

from .dataset import SemiSupervisedDataset, make_split
from .errors import ConvergenceError, DegenerateError, FeasibilityError, InputError
from .solvers import (
    SolverConfig,
    dantzig_two_constraint,
    lasso_fit,
    min_quadratic_linf,
    min_quadratic_linf_capped,
)
from .solvers.lasso import critical_penalty
from .tuning import CrossValidated, FeasibilityPath, Fixed, cv_lasso_penalty, feasibility_path_penalty

VARIANCE_MODES = ("no_shift", "covariate_shift")
SUPPORT_RTOL = 1e-8
DANTZIG_BUMP = 1.1
DANTZIG_MAX_BUMPS = 5


@dataclass(frozen=True)
class EstimatorConfig:
    lambda_beta: Fixed | CrossValidated = CrossValidated()
    lambda_u: Fixed | FeasibilityPath | CrossValidated = FeasibilityPath()
    lambda_gamma: Fixed | CrossValidated = CrossValidated()
    variance_mode: str = "no_shift"
    alpha: float = 0.05
    split_seed: int = 0
    cap_exponent_q: float = 0.2
    dr_folds: int = 5
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.dr_folds < 2:
            raise InputError("dr_folds must be >= 2")
        if not 0 < self.cap_exponent_q < 0.5:
            raise InputError("cap_exponent_q must lie in (0, 0.5)")
        if self.variance_mode not in VARIANCE_MODES:
            raise InputError(f"variance_mode must be one of {VARIANCE_MODES}")
        if isinstance(self.lambda_beta, FeasibilityPath) or isinstance(self.lambda_gamma, FeasibilityPath):
            raise InputError("the feasibility path applies to lambda_u only")

    def with_(self, **changes) -> "EstimatorConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class EstimateReport:
    estimator: str
    theta_hat: float
    std_error: float
    ci_lower: float
    ci_upper: float
    alpha: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def ci_length(self) -> float:
        return self.ci_upper - self.ci_lower

    def covers(self, value: float) -> bool:
        return bool(self.ci_lower <= value <= self.ci_upper)

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "theta_hat": self.theta_hat,
            "std_error": self.std_error,
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "alpha": self.alpha,
            "diagnostics": _plain(self.diagnostics),
        }


@dataclass(frozen=True, eq=False)
class NuisanceFit:
    beta_hat: np.ndarray
    residuals_v: np.ndarray
    gamma_hat: np.ndarray | None = None


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def normal_quantile(p: float) -> float:
    return NormalDist().inv_cdf(p)


def _report(name, theta, se, alpha, diagnostics, half_width=None):
    z = normal_quantile(1.0 - alpha / 2.0)
    hw = z * se if half_width is None else half_width
    return EstimateReport(name, float(theta), float(se), float(theta - hw), float(theta + hw), alpha, diagnostics)


def _point_report(name, theta, alpha, diagnostics):
    return EstimateReport(name, float(theta), float("nan"), float("nan"), float("nan"), alpha, diagnostics)


# ---------------------------------------------------------------------------
# nuisance fits

def _lasso(X, y, policy, cfg: EstimatorConfig, tag: str):
    """Lasso with the penalty set by ``policy``; returns ``(coef, lam, iterations)``."""
    if X.shape[1] == 0:
        return np.zeros(0), 0.0, 0
    if isinstance(policy, Fixed):
        lam = policy.value
    elif isinstance(policy, CrossValidated):
        lam, _ = cv_lasso_penalty(X, y, policy.folds, cfg.split_seed, policy.grid, cfg.solver, tag=tag)
    else:
        raise InputError(f"policy {policy!r} does not apply to a Lasso penalty")
    res = lasso_fit(X, y, lam, cfg.solver)
    if not res.converged:
        raise ConvergenceError(
            f"Lasso ({tag}) did not converge in {res.iterations} sweeps (KKT residual {res.kkt_residual:.3e})")
    return res.coefficients, float(lam), res.iterations


def _u_penalty(Sigma, xi, W_xi, y_xi, policy, cfg: EstimatorConfig, tag: str):
    """Penalty for the minimum-variance program.

    ``CrossValidated`` folds the rows that built ``xi`` (controls ``W_xi``,
    outcomes ``y_xi``): for each fold ``xi`` is rebuilt without it, the
    program is solved, and ``u`` is scored by the held-out squared error of
    ``y - W'u``. The grid is ``||xi||_inf`` times a log grid on [1e-3, 1].
    """
    if isinstance(policy, Fixed):
        return policy.value
    if isinstance(policy, FeasibilityPath):
        return feasibility_path_penalty(Sigma, xi, policy.grid, policy.safety_factor)
    if not isinstance(policy, CrossValidated):
        raise InputError(f"policy {policy!r} does not apply to lambda_u")
    scale = float(np.max(np.abs(xi)))
    if scale == 0.0:
        return 0.0
    grid = np.asarray(policy.grid, dtype=float) if policy.grid is not None else scale * np.logspace(0, -3, 25)
    if grid.size == 1:
        return float(grid[0])
    from .tuning import fold_ids

    labels = fold_ids(W_xi.shape[0], policy.folds, cfg.split_seed, tag)
    err = np.zeros(grid.size)
    for k in range(policy.folds):
        hold = labels == k
        xi_k = W_xi[~hold].T @ y_xi[~hold] / int((~hold).sum())
        u = None
        # descending path with warm starts
        for g in np.argsort(-grid, kind="stable"):
            try:
                u = min_quadratic_linf(Sigma, xi_k, grid[g], cfg.solver, start=u).coefficients
            except FeasibilityError:
                err[g] = np.inf
                u = None
                continue
            err[g] += float(np.sum((y_xi[hold] - W_xi[hold] @ u) ** 2))
    ties = np.flatnonzero(err == err.min())
    if not np.isfinite(err.min()):
        raise FeasibilityError("lambda_u cross-validation found no feasible grid value; extend the grid",
                               "linf_residual")
    return float(grid[ties[np.argmax(grid[ties])]])


def _solve_u(Sigma, xi, lam, cfg: EstimatorConfig, rows=None, cap=np.inf):
    if rows is None or np.isinf(cap):
        res = min_quadratic_linf(Sigma, xi, lam, cfg.solver)
    else:
        res = min_quadratic_linf_capped(Sigma, xi, lam, rows, cap, cfg.solver)
    if not res.converged:
        raise ConvergenceError(
            f"minimum-variance program did not converge (KKT {res.kkt_residual:.3e}, "
            f"feasibility {res.feasibility_residual:.3e})")
    return res


def _capped_feasible(Sigma, xi, lam, rows, cap, cfg: EstimatorConfig) -> bool:
    try:
        _solve_u(Sigma, xi, lam, cfg, rows=rows, cap=cap)
    except (FeasibilityError, ConvergenceError):
        return False
    return True


def _support_size(coef) -> int:
    if coef.size == 0:
        return 0
    top = float(np.max(np.abs(coef)))
    if top == 0.0:
        return 0
    return int(np.sum(np.abs(coef) > SUPPORT_RTOL * top))


# ---------------------------------------------------------------------------
# estimators

def plug_in_theta(dataset: SemiSupervisedDataset, config: EstimatorConfig | None = None) -> EstimateReport:
    """Ratio ``sum v_i Y_i / sum v_i^2`` over labeled rows.

    ``v`` are residuals of a Lasso of Z on W fitted on all (pooled) rows.
    Point estimate only: ``std_error`` and the interval are NaN.
    """
    cfg = config or EstimatorConfig()
    beta, lam, _ = _lasso(dataset.w_pooled, dataset.z_pooled, cfg.lambda_beta, cfg, "plug_in:beta")
    v = dataset.z_labeled - dataset.w_labeled @ beta
    den = float(v @ v)
    if den <= 0.0:
        raise DegenerateError("plug-in denominator sum(v^2) is zero")
    theta = float(v @ dataset.y_labeled) / den
    return _point_report("lasso_plugin", theta, cfg.alpha,
                         {"beta_support_size": _support_size(beta), "chosen_lambdas": {"beta": lam}})


def lasso_coefficient(dataset: SemiSupervisedDataset, config: EstimatorConfig | None = None) -> EstimateReport:
    """First coordinate of a Lasso of Y on X = (Z, W) over the labeled rows (point only)."""
    cfg = config or EstimatorConfig()
    gamma, lam, _ = _lasso(dataset.x_labeled, dataset.y_labeled, cfg.lambda_gamma, cfg, "lasso:gamma")
    return _point_report("lasso", gamma[0], cfg.alpha,
                         {"gamma_support_size": _support_size(gamma), "chosen_lambdas": {"gamma": lam}})


def ss_sr(dataset: SemiSupervisedDataset, config: EstimatorConfig | None = None, *,
          index_sets=None, name: str = "ss_sr") -> EstimateReport:
    """Sparsity-robust debiased estimator with a two-way labeled split.

    The labeled rows are split into ``I1`` and ``I2`` (or taken from
    ``index_sets``). Z is regressed on W by the Lasso over ``I1`` plus all
    unlabeled rows (``Jbar``); ``xi`` is the ``I2`` average of ``W Y``, the
    Gram matrix is the ``Jbar`` average of ``W W'``, and the debiasing
    direction ``u`` solves the minimum-variance program. With no unlabeled
    rows this is the supervised SR estimator.
    """
    cfg = config or EstimatorConfig()
    n, m = dataset.n, dataset.m
    if n < 4:
        raise InputError(f"ss_sr needs at least 4 labeled rows, got {n}")
    I1, I2 = index_sets if index_sets is not None else make_split(dataset, "two_way", cfg.split_seed).index_sets
    W, Z, Y = dataset.w_labeled, dataset.z_labeled, dataset.y_labeled
    Wj = np.vstack([W[I1], dataset.w_unlabeled])
    Zj = np.concatenate([Z[I1], dataset.z_unlabeled])
    n1, nj = len(I1), Wj.shape[0]

    beta, lam_b, it_b = _lasso(Wj, Zj, cfg.lambda_beta, cfg, "ss_sr:beta")
    v_j = Zj - Wj @ beta
    v1 = v_j[:n1]
    Y1 = Y[I1]
    if dataset.d:
        xi = W[I2].T @ Y[I2] / len(I2)
        Sigma = Wj.T @ Wj / nj
        lam_u = _u_penalty(Sigma, xi, W[I2], Y[I2], cfg.lambda_u, cfg, "ss_sr:u")
        ures = _solve_u(Sigma, xi, lam_u, cfg)
        u = ures.coefficients
        it_u = ures.iterations
    else:
        u, lam_u, it_u = np.zeros(0), 0.0, 0
    uW = Wj @ u

    s_v1 = float(v1 @ v1) / n1
    if s_v1 <= 0.0:
        raise DegenerateError("ss_sr denominator (mean of v^2 over I1) is zero")
    theta = (float(v1 @ Y1) / n1 - float(uW @ v_j) / nj) / s_v1

    first = np.sum(((Y1 - theta * v1) / n1 - uW[:n1] / nj) ** 2) / s_v1
    uW_unl = uW[n1:]
    s_v2 = float(v_j[n1:] @ v_j[n1:]) / m if m else float("nan")
    weight = 1.0 / s_v1 if cfg.variance_mode == "no_shift" or m == 0 else s_v2 / s_v1 ** 2
    second = weight * float(uW_unl @ uW_unl) / nj ** 2
    se = float(np.sqrt(first + second))
    diag = {
        "beta_support_size": _support_size(beta),
        "sigma_v1_sq": s_v1,
        "sigma_v2_sq": s_v2,
        "variance_mode": cfg.variance_mode,
        "solver_iterations": {"beta": it_b, "u": it_u},
        "chosen_lambdas": {"beta": lam_b, "u": lam_u},
        "split_seed": cfg.split_seed,
        "split_sizes": [len(I1), len(I2)],
    }
    return _report(name, theta, se, cfg.alpha, diag)


def ss_sr_modified(dataset: SemiSupervisedDataset, config: EstimatorConfig | None = None, *,
                   index_sets=None, cap=None, name: str = "ss_sr_mod") -> EstimateReport:
    """Sparsity-robust estimator with a three-way split and a row cap on ``u``.

    ``I1`` (with unlabeled rows, ``J1``) fits the Lasso of Z on W, ``I3``
    gives ``xi`` and the outcome variance ``V_Y``, and ``I2`` (with unlabeled
    rows, ``J2``) gives the Gram matrix. ``u`` additionally satisfies
    ``max_{J2} |W_i'u| <= sqrt(V_Y) |J2|^q``; ``cap`` overrides that bound
    (``numpy.inf`` disables it). When ``V_Y = 0`` the only feasible ``u`` is
    zero and it is used directly.
    """
    cfg = config or EstimatorConfig()
    n, m = dataset.n, dataset.m
    if n < 6 and index_sets is None:
        raise InputError(f"ss_sr_mod needs at least 6 labeled rows, got {n}")
    I1, I2, I3 = index_sets if index_sets is not None else make_split(dataset, "three_way", cfg.split_seed).index_sets
    W, Z, Y = dataset.w_labeled, dataset.z_labeled, dataset.y_labeled
    W1 = np.vstack([W[I1], dataset.w_unlabeled])
    Z1 = np.concatenate([Z[I1], dataset.z_unlabeled])
    W2 = np.vstack([W[I2], dataset.w_unlabeled])
    Z2 = np.concatenate([Z[I2], dataset.z_unlabeled])
    n1, n2 = len(I1), W2.shape[0]

    beta, lam_b, it_b = _lasso(W1, Z1, cfg.lambda_beta, cfg, "ss_sr_mod:beta")
    v1 = Z[I1] - W[I1] @ beta
    v2 = Z2 - W2 @ beta
    Y1, Y3 = Y[I1], Y[I3]
    V_y = float(np.mean((Y3 - Y3.mean()) ** 2))
    if cap is None:
        cap = np.sqrt(V_y) * n2 ** cfg.cap_exponent_q
    lam_u, it_u, cap_active = 0.0, 0, False
    if dataset.d and cap > 0:
        xi = W[I3].T @ Y3 / len(I3)
        Sigma = W2.T @ W2 / n2
        if isinstance(cfg.lambda_u, FeasibilityPath) and np.isfinite(cap):
            # feasibility of the capped program, not just the l-infinity constraint
            policy = cfg.lambda_u
            lam_u = feasibility_path_penalty(Sigma, xi, policy.grid, policy.safety_factor,
                                             is_feasible=lambda lam: _capped_feasible(Sigma, xi, lam, W2, cap, cfg))
        else:
            lam_u = _u_penalty(Sigma, xi, W[I3], Y3, cfg.lambda_u, cfg, "ss_sr_mod:u")
        ures = _solve_u(Sigma, xi, lam_u, cfg, rows=W2, cap=cap)
        u = ures.coefficients
        it_u = ures.iterations
        cap_active = bool(ures.info.get("cap_active", False))
    else:
        u = np.zeros(dataset.d)
    uW2 = W2 @ u

    s_v1 = float(v1 @ v1) / n1
    if s_v1 <= 0.0:
        raise DegenerateError("ss_sr_mod denominator (mean of v^2 over I1) is zero")
    theta = (float(v1 @ Y1) / n1 - float(uW2 @ v2) / n2) / s_v1
    var = (np.sum((Y1 - theta * v1) ** 2 * v1 ** 2) / n1 ** 2 + np.sum(uW2 ** 2 * v2 ** 2) / n2 ** 2) / s_v1 ** 2
    diag = {
        "beta_support_size": _support_size(beta),
        "sigma_v1_sq": s_v1,
        "outcome_variance": V_y,
        "cap": float(cap),
        "cap_active": cap_active,
        "solver_iterations": {"beta": it_b, "u": it_u},
        "chosen_lambdas": {"beta": lam_b, "u": lam_u},
        "split_seed": cfg.split_seed,
        "split_sizes": [len(I1), len(I2), len(I3)],
    }
    return _report(name, theta, float(np.sqrt(var)), cfg.alpha, diag)


def _dantzig_beta(dataset: SemiSupervisedDataset, cfg: EstimatorConfig):
    """Two-constraint Dantzig fit, bumping a cross-validated bound until feasible."""
    Wl, zl = dataset.w_labeled, dataset.z_labeled
    Wa, za = dataset.w_pooled, dataset.z_pooled
    policy = cfg.lambda_beta
    if isinstance(policy, Fixed):
        res = dantzig_two_constraint(Wl, zl, Wa, za, policy.value, cfg.solver)
        return res, policy.value, 0
    if not isinstance(policy, CrossValidated):
        raise InputError(f"policy {policy!r} does not apply to lambda_beta")
    lam_lasso, _ = cv_lasso_penalty(Wa, za, policy.folds, cfg.split_seed, policy.grid, cfg.solver, tag="ss_dfa:beta")
    # the Lasso optimum at penalty L satisfies the pooled score bound at L / 2
    lam = 0.5 * lam_lasso
    for bump in range(DANTZIG_MAX_BUMPS + 1):
        try:
            return dantzig_two_constraint(Wl, zl, Wa, za, lam, cfg.solver), lam, bump
        except FeasibilityError as exc:
            last = exc
            lam *= DANTZIG_BUMP
    raise FeasibilityError(f"Dantzig program infeasible after {DANTZIG_MAX_BUMPS} bumps: {last}",
                           last.constraint, last.residual)


def ss_dfa(dataset: SemiSupervisedDataset, config: EstimatorConfig | None = None, *,
           name: str = "ss_dfa") -> EstimateReport:
    """Degrees-of-freedom adjusted estimator.

    A labeled-data Lasso of Y on X gives ``gamma``; a Dantzig selector with
    a labeled and a pooled score constraint gives ``beta``. The correction
    term is divided by ``1 - q/n`` with ``q`` the Lasso support size, and the
    interval is ``theta +- z * sigma / (sqrt(n) (1 - q/n))``.
    """
    cfg = config or EstimatorConfig()
    n = dataset.n
    X, Y, Z = dataset.x_labeled, dataset.y_labeled, dataset.z_labeled
    gamma, lam_g, it_g = _lasso(X, Y, cfg.lambda_gamma, cfg, "ss_dfa:gamma")
    if dataset.d:
        bres, lam_b, bumps = _dantzig_beta(dataset, cfg)
        if not bres.converged:
            raise ConvergenceError(
                f"Dantzig LP not certified (gap {bres.kkt_residual:.3e}, feasibility {bres.feasibility_residual:.3e})")
        beta, it_b = bres.coefficients, bres.iterations
    else:
        beta, lam_b, bumps, it_b = np.zeros(0), 0.0, 0, 0
    v = Z - dataset.w_labeled @ beta
    q = _support_size(gamma)
    if q >= n:
        raise DegenerateError(f"support size {q} >= n = {n}: degrees-of-freedom adjustment undefined")
    dof = 1.0 - q / n
    resid = Y - X @ gamma
    den = float(v @ Z) / n
    if abs(den) <= 1e-12 * max(1.0, float(np.abs(v).max() * np.abs(Z).max())):
        raise DegenerateError("ss_dfa denominator mean(v Z) is numerically zero")
    theta = gamma[0] + (float(v @ resid) / n) / (dof * den)
    vv = float(v @ v)
    if vv <= 0.0:
        raise DegenerateError("ss_dfa variance denominator sum(v^2) is zero")
    sigma = float(np.sqrt(float(resid @ resid) / vv))
    se = sigma / (np.sqrt(n) * dof)
    diag = {
        "beta_support_size": _support_size(beta),
        "gamma_support_size": q,
        "sigma_dfa": sigma,
        "dof_factor": dof,
        "dantzig_bumps": bumps,
        "solver_iterations": {"gamma": it_g, "beta": it_b},
        "chosen_lambdas": {"gamma": lam_g, "beta": lam_b},
        "split_seed": cfg.split_seed,
    }
    return _report(name, theta, se, cfg.alpha, diag)


def ss_dr(dataset: SemiSupervisedDataset, config: EstimatorConfig | None = None, *,
          name: str = "ss_dr") -> EstimateReport:
    """Cross-fitted doubly robust estimator.

    Labeled and unlabeled rows are each split into K folds. For fold k a
    Lasso of Y on X uses the out-of-fold labeled rows and a Lasso of Z on W
    the out-of-fold labeled and unlabeled rows; the fold estimate is
    ``gamma_1 + sum v (Y - X'gamma) / sum v Z`` over the in-fold labeled rows,
    and the K estimates are averaged.
    """
    cfg = config or EstimatorConfig()
    K = cfg.dr_folds
    if dataset.n < 2 * K:
        raise InputError(f"ss_dr with K={K} needs at least {2 * K} labeled rows, got {dataset.n}")
    plan = make_split(dataset, "k_fold", cfg.split_seed, folds=K)
    X, Y, Z, W = dataset.x_labeled, dataset.y_labeled, dataset.z_labeled, dataset.w_labeled
    Wu, Zu = dataset.w_unlabeled, dataset.z_unlabeled
    n = dataset.n
    estimates, lams_g, lams_b = [], [], []
    num_var = 0.0
    den_var = 0.0
    for k in range(K):
        Ik = plan.index_sets[k]
        I_out = np.concatenate([plan.index_sets[j] for j in range(K) if j != k])
        J_out = np.concatenate([plan.unlabeled_sets[j] for j in range(K) if j != k]) if dataset.m else np.zeros(0, int)
        gamma, lam_g, _ = _lasso(X[I_out], Y[I_out], cfg.lambda_gamma, cfg, f"ss_dr:gamma:{k}")
        Wb = np.vstack([W[I_out], Wu[J_out]])
        Zb = np.concatenate([Z[I_out], Zu[J_out]])
        beta, lam_b, _ = _lasso(Wb, Zb, cfg.lambda_beta, cfg, f"ss_dr:beta:{k}")
        v = Z[Ik] - W[Ik] @ beta
        e = Y[Ik] - X[Ik] @ gamma
        den = float(v @ Z[Ik])
        if abs(den) <= 1e-12 * max(1.0, float(np.abs(v).max() * np.abs(Z[Ik]).max())):
            raise DegenerateError(f"ss_dr fold {k}: denominator sum(v Z) is numerically zero")
        estimates.append(gamma[0] + float(v @ e) / den)
        num_var += float(np.sum(v ** 2 * e ** 2))
        den_var += float(v @ v)
        lams_g.append(lam_g)
        lams_b.append(lam_b)
    theta = float(np.mean(estimates))
    if den_var <= 0.0:
        raise DegenerateError("ss_dr variance denominator is zero")
    sigma = float(np.sqrt((num_var / n) / (den_var / n) ** 2))
    diag = {
        "fold_estimates": estimates,
        "sigma_dr": sigma,
        "folds": K,
        "chosen_lambdas": {"gamma": lams_g, "beta": lams_b},
        "split_seed": cfg.split_seed,
    }
    return _report(name, theta, sigma / np.sqrt(n), cfg.alpha, diag)


class UnsupervisedRowsIgnored(UserWarning):
    """A supervised estimator was given unlabeled rows."""


class _Supervised:
    """Supervised degenerate of a semi-supervised estimator: unlabeled rows are dropped."""

    def __init__(self, fn, name):
        self.fn = fn
        self.name = self.__name__ = name

    def __call__(self, dataset, config=None):
        if dataset.m:
            warnings.warn(f"{self.name} is supervised: ignoring {dataset.m} unlabeled rows", UnsupervisedRowsIgnored,
                          stacklevel=2)
        return self.fn(dataset.supervised(), config, name=self.name)

    def __repr__(self):
        return f"<supervised {self.fn.__name__} as {self.name!r}>"


sr = _Supervised(ss_sr, "sr")
sr_modified = _Supervised(ss_sr_modified, "sr_mod")
dfa = _Supervised(ss_dfa, "dfa")
dr = _Supervised(ss_dr, "dr")

ESTIMATORS = {
    "lasso": lasso_coefficient,
    "lasso_plugin": plug_in_theta,
    "sr": sr,
    "ss_sr": ss_sr,
    "ss_sr_mod": ss_sr_modified,
    "dfa": dfa,
    "ss_dfa": ss_dfa,
    "dr": dr,
    "ss_dr": ss_dr,
}
SUPERVISED_IDS = ("lasso", "sr", "dfa", "dr")
POINT_ONLY = ("lasso", "lasso_plugin")


def get_estimator(name: str):
    try:
        return ESTIMATORS[name]
    except KeyError:
        raise InputError(f"unknown estimator {name!r}; valid: {', '.join(ESTIMATORS)}") from None


def select_lambda(dataset: SemiSupervisedDataset, which: str, policy, seed: int = 0,
                  solver: SolverConfig | None = None) -> float:
    """Penalty for one nuisance problem on the full dataset.

    ``which="beta"``: Lasso of Z on W over pooled rows; ``"gamma"``: Lasso of
    Y on X over labeled rows; ``"u"``: minimum-variance program with the
    pooled Gram matrix and ``xi`` from labeled rows.
    """
    cfg = EstimatorConfig(split_seed=seed, solver=solver or SolverConfig())
    if which == "beta":
        X, y = dataset.w_pooled, dataset.z_pooled
    elif which == "gamma":
        X, y = dataset.x_labeled, dataset.y_labeled
    elif which == "u":
        Wp = dataset.w_pooled
        Sigma = Wp.T @ Wp / dataset.N
        xi = dataset.w_labeled.T @ dataset.y_labeled / dataset.n
        return _u_penalty(Sigma, xi, dataset.w_labeled, dataset.y_labeled, policy, cfg, "select:u")
    else:
        raise InputError(f"which must be 'beta', 'gamma' or 'u', got {which!r}")
    if isinstance(policy, Fixed):
        return policy.value
    if isinstance(policy, CrossValidated):
        return cv_lasso_penalty(X, y, policy.folds, seed, policy.grid, cfg.solver, tag=f"select:{which}")[0]
    raise InputError(f"policy {policy!r} does not apply to {which}")


__all__ = [
    "EstimatorConfig", "EstimateReport", "NuisanceFit", "ESTIMATORS", "critical_penalty",
    "plug_in_theta", "lasso_coefficient", "ss_sr", "ss_sr_modified", "ss_dfa", "ss_dr",
    "sr", "sr_modified", "dfa", "dr", "select_lambda", "get_estimator", "normal_quantile",
]
