"""Minimum-variance quadratic programs under an l-infinity residual constraint.

The uncapped problem ``min u'Su  s.t. ||xi - Su||_inf <= lam`` is solved
through its Lagrangian dual, which is the covariance-form Lasso
``min 0.5 w'Sw - xi'w + lam ||w||_1``; the dual minimiser is itself a primal
optimum, and ``2 (lam ||u||_1 - u'(xi - Su))`` is the duality gap.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..errors import FeasibilityError, InputError
from ._cd import cd_solve
from .base import SolverConfig, SolverResult, as_matrix, as_vector

DEFAULT_CONFIG = SolverConfig()
_SYMMETRY_RTOL = 1e-8


def _check_problem(Sigma_hat, xi_hat, lam_u):
    S = as_matrix(Sigma_hat, "Sigma_hat")
    if S.shape[0] != S.shape[1]:
        raise InputError(f"Sigma_hat must be square, got shape {S.shape}")
    xi = as_vector(xi_hat, "xi_hat", S.shape[0])
    scale = max(1.0, float(np.max(np.abs(S))))
    asym = float(np.max(np.abs(S - S.T)))
    if asym > _SYMMETRY_RTOL * scale:
        raise InputError(f"Sigma_hat is not symmetric (max asymmetry {asym:.3e})")
    lam = float(lam_u)
    if not np.isfinite(lam) or lam < 0:
        raise InputError(f"lambda_u must be finite and >= 0, got {lam}")
    return np.ascontiguousarray(0.5 * (S + S.T)), xi, lam


def min_feasible_bound(Sigma_hat, xi_hat) -> float:
    """Smallest ``lam`` for which ``||xi - Sigma u||_inf <= lam`` is feasible.

    Zero whenever ``Sigma_hat`` is nonsingular; otherwise a Chebyshev
    approximation LP is solved.
    """
    S = np.asarray(Sigma_hat, dtype=float)
    xi = np.asarray(xi_hat, dtype=float)
    d = xi.shape[0]
    evals = np.linalg.eigvalsh(0.5 * (S + S.T))
    if evals[0] > 1e-10 * max(evals[-1], 1e-300):
        return 0.0
    # variables (u, s): minimise s subject to |xi - S u| <= s
    c = np.zeros(d + 1)
    c[-1] = 1.0
    ones = np.ones((d, 1))
    A = np.block([[S, -ones], [-S, -ones]])
    b = np.concatenate([xi, -xi])
    bounds = [(None, None)] * d + [(0, None)]
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
    if res.status != 0:
        raise FeasibilityError(f"feasibility LP failed: {res.message}", "linf_residual")
    return float(res.x[-1])


def _feasibility_residual(S, xi, u, lam):
    return max(0.0, float(np.max(np.abs(xi - S @ u))) - lam)


def min_quadratic_linf(Sigma_hat, xi_hat, lam_u, cfg: SolverConfig | None = None, *, start=None) -> SolverResult:
    """Solve ``min u'Su  s.t. ||xi - Su||_inf <= lam_u``.

    ``start`` warm-starts the dual iterations (e.g. from a neighbouring
    ``lam_u`` on a path); it changes speed, not the optimum.

    Raises
    ------
    FeasibilityError
        When ``Sigma_hat`` is singular and ``xi_hat`` lies further than
        ``lam_u`` (in sup norm) from its range.
    """
    cfg = cfg or DEFAULT_CONFIG
    S, xi, lam = _check_problem(Sigma_hat, xi_hat, lam_u)
    diag = np.diag(S)
    dead = diag <= 1e-14 * max(1.0, float(diag.max()))
    if np.any(np.abs(xi[dead]) > lam):
        j = int(np.flatnonzero(dead & (np.abs(xi) > lam))[0])
        raise FeasibilityError(
            f"coordinate {j} has zero variance but |xi_j| = {abs(xi[j]):.6g} > lambda_u = {lam:.6g}",
            "linf_residual",
            abs(xi[j]) - lam,
        )
    tol = min(cfg.kkt_tolerance, cfg.feasibility_tolerance)
    u = np.zeros(xi.shape[0]) if start is None else np.array(as_vector(start, "start", xi.shape[0]))
    r, sweeps, converged, kkt = cd_solve(S, xi, lam, u, cfg.max_iterations, tol)
    feas = _feasibility_residual(S, xi, u, lam)
    if not converged:
        bound = min_feasible_bound(S, xi)
        if lam < bound:
            raise FeasibilityError(
                f"infeasible: the smallest achievable ||xi - Sigma u||_inf is {bound:.6g} > lambda_u = {lam:.6g}",
                "linf_residual",
                bound - lam,
            )
    gap = 2.0 * (lam * float(np.abs(u).sum()) - float(u @ r))
    return SolverResult(
        coefficients=u,
        objective=float(u @ S @ u),
        kkt_residual=float(kkt),
        feasibility_residual=feas,
        iterations=int(sweeps),
        converged=bool(converged and feas <= cfg.feasibility_tolerance),
        info={"duality_gap": gap},
    )


def min_quadratic_linf_capped(Sigma_hat, xi_hat, lam_u, rows, cap, cfg: SolverConfig | None = None) -> SolverResult:
    """As :func:`min_quadratic_linf` with the extra constraints ``|rows_i'u| <= cap``.

    ``cap = inf`` reproduces the uncapped solver exactly. When the uncapped
    optimum already satisfies every row constraint it is returned, since it is
    optimal over the smaller feasible set too. Otherwise the program is handed
    to an interior-point conic solver (Clarabel through cvxpy).
    """
    cfg = cfg or DEFAULT_CONFIG
    S, xi, lam = _check_problem(Sigma_hat, xi_hat, lam_u)
    R = as_matrix(rows, "rows")
    if R.shape[1] != S.shape[0]:
        raise InputError(f"rows has {R.shape[1]} columns, expected {S.shape[0]}")
    cap = float(cap)
    if np.isnan(cap) or cap <= 0:
        raise InputError(f"cap must be > 0, got {cap}")

    base = min_quadratic_linf(S, xi, lam, cfg)
    if np.isinf(cap):
        return base
    row_excess = float(np.max(np.abs(R @ base.coefficients))) - cap
    if row_excess <= 0.0:
        info = dict(base.info, cap_active=False)
        return SolverResult(base.coefficients, base.objective, base.kkt_residual,
                            base.feasibility_residual, base.iterations, base.converged, info)
    return _capped_conic(S, xi, lam, R, cap, cfg)


def _capped_conic(S, xi, lam, R, cap, cfg):
    import cvxpy as cp

    d = xi.shape[0]
    evals, evecs = np.linalg.eigh(S)
    keep = evals > 1e-12 * max(evals[-1], 1e-300)
    L = evecs[:, keep] * np.sqrt(evals[keep])
    G = np.vstack([S, -S, R, -R])
    h = np.concatenate([xi + lam, lam - xi, np.full(R.shape[0], cap), np.full(R.shape[0], cap)])
    # a little slack inside the bounds keeps the interior-point iterate on the
    # feasible side of the exact constraints
    margin = np.concatenate([np.full(2 * d, min(0.25 * cfg.feasibility_tolerance, 0.5 * lam)),
                             np.full(2 * R.shape[0], min(0.25 * cfg.feasibility_tolerance, 0.5 * cap))])
    u = cp.Variable(d)
    con = G @ u <= h - margin
    prob = cp.Problem(cp.Minimize(cp.sum_squares(L.T @ u)), [con])
    try:
        prob.solve(
            solver=cp.CLARABEL,
            max_iter=min(cfg.max_iterations, 500),
            tol_gap_abs=1e-10,
            tol_gap_rel=1e-10,
            tol_feas=1e-11,
        )
    except cp.SolverError as exc:  # pragma: no cover - solver crash
        raise FeasibilityError(f"capped QP solver failed: {exc}", "solver") from exc
    if prob.status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise FeasibilityError("infeasible: residual bound and row cap cannot hold together", "row_cap")
    if u.value is None or con.dual_value is None:
        raise FeasibilityError(f"capped QP returned status {prob.status}", "solver")
    sol = np.asarray(u.value, dtype=float)
    mu = np.maximum(np.asarray(con.dual_value, dtype=float), 0.0)
    feas = max(
        _feasibility_residual(S, xi, sol, lam),
        max(0.0, float(np.max(np.abs(R @ sol))) - cap),
    )
    obj = float(sol @ S @ sol)
    # KKT certificate against the exact bounds: stationarity of the Lagrangian
    # and complementary slackness (the latter equals the duality gap when
    # stationarity holds)
    stationarity = float(np.max(np.abs(2.0 * S @ sol + G.T @ mu)))
    gap = float(mu @ (h - G @ sol))
    kkt = max(stationarity, abs(gap) / (1.0 + obj))
    stats = prob.solver_stats
    return SolverResult(
        coefficients=sol,
        objective=obj,
        kkt_residual=kkt,
        feasibility_residual=feas,
        iterations=int(stats.num_iters or 0),
        converged=bool(prob.status == cp.OPTIMAL and feas <= cfg.feasibility_tolerance
                       and kkt <= cfg.kkt_tolerance),
        info={"duality_gap": gap, "stationarity": stationarity, "cap_active": True, "status": prob.status},
    )
