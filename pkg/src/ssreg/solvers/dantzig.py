"""Dantzig selector with a labeled-sample and a pooled-sample constraint.

    minimise ||b||_1
    s.t.  ||n^-1 W_lab'(z_lab - W_lab b)||_inf <= sqrt(N/n) * lam
          ||N^-1 W_all'(z_all - W_all b)||_inf <= lam

solved as a linear program in the split variables ``b = b+ - b-`` with HiGHS.
The duality gap is recomputed from the returned multipliers and reported as
the optimality certificate.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from ..errors import FeasibilityError, InputError
from .base import SolverConfig, SolverResult, as_matrix, as_vector

DEFAULT_CONFIG = SolverConfig()
MAX_GENERATION_ROUNDS = 50


def constraint_residuals(W_lab, z_lab, W_all, z_all, beta):
    """Sup-norm of the labeled and pooled score vectors at ``beta``."""
    n, N = W_lab.shape[0], W_all.shape[0]
    lab = np.max(np.abs(W_lab.T @ (z_lab - W_lab @ beta))) / n
    pooled = np.max(np.abs(W_all.T @ (z_all - W_all @ beta))) / N
    return float(lab), float(pooled)


def _chebyshev(G, c):
    """min_b ||c - G b||_inf, used to diagnose infeasibility."""
    d = G.shape[1]
    obj = np.zeros(d + 1)
    obj[-1] = 1.0
    ones = np.ones((G.shape[0], 1))
    # minimise t subject to -t <= c - G b <= t, b free
    A = np.block([[-G, -ones], [G, -ones]])
    rhs = np.concatenate([-c, c])
    res = linprog(obj, A_ub=A, b_ub=rhs, bounds=[(None, None)] * d + [(0, None)], method="highs")
    return float(res.x[-1]) if res.status == 0 else np.inf


def dantzig_two_constraint(W_lab, z_lab, W_all, z_all, lambda_beta, cfg: SolverConfig | None = None) -> SolverResult:
    """Solve the two-constraint Dantzig program.

    ``W_lab`` holds the labeled rows; ``W_all`` the pooled labeled and
    unlabeled rows (the labeled block is expected to be part of it). The
    labeled bound is inflated by ``sqrt(N/n)`` computed from the row counts.

    Raises
    ------
    FeasibilityError
        If no ``b`` satisfies both bounds. ``constraint`` is ``"labeled"``,
        ``"pooled"`` or ``"joint"`` and ``residual`` is the shortfall.
    """
    cfg = cfg or DEFAULT_CONFIG
    W_lab = as_matrix(W_lab, "W_lab")
    W_all = as_matrix(W_all, "W_all")
    z_lab = as_vector(z_lab, "z_lab", W_lab.shape[0])
    z_all = as_vector(z_all, "z_all", W_all.shape[0])
    if W_lab.shape[1] != W_all.shape[1]:
        raise InputError("W_lab and W_all must have the same number of columns")
    lam = float(lambda_beta)
    if not np.isfinite(lam) or lam < 0:
        raise InputError(f"lambda_beta must be finite and >= 0, got {lam}")

    n, N, d = W_lab.shape[0], W_all.shape[0], W_lab.shape[1]
    G_lab = W_lab.T @ W_lab / n
    c_lab = W_lab.T @ z_lab / n
    G_all = W_all.T @ W_all / N
    c_all = W_all.T @ z_all / N
    t_lab = np.sqrt(N / n) * lam
    t_all = lam

    # zero is optimal whenever it is feasible
    if np.max(np.abs(c_lab)) <= t_lab and np.max(np.abs(c_all)) <= t_all:
        lab, pooled = constraint_residuals(W_lab, z_lab, W_all, z_all, np.zeros(d))
        return SolverResult(np.zeros(d), 0.0, 0.0, 0.0, 0, True,
                            {"duality_gap": 0.0, "labeled_residual": lab, "pooled_residual": pooled})

    A = np.block([[G_lab, -G_lab], [-G_lab, G_lab], [G_all, -G_all], [-G_all, G_all]])
    b = np.concatenate([c_lab + t_lab, t_lab - c_lab, c_all + t_all, t_all - c_all])
    cost = np.ones(2 * d)
    res, y, rounds = _constraint_generation(A, b, cost, cfg)
    if res.status == 2:
        raise _infeasible(G_lab, c_lab, t_lab, G_all, c_all, t_all)
    if res.x is None:
        raise FeasibilityError(f"Dantzig LP failed: {res.message}", "solver")

    x = res.x
    beta = x[:d] - x[d:]
    lab, pooled = constraint_residuals(W_lab, z_lab, W_all, z_all, beta)
    feas = max(0.0, lab - t_lab, pooled - t_all)
    # dual of  min c'x, Ax <= b, x >= 0  is  max b'y, A'y <= c, y <= 0
    primal = float(np.abs(beta).sum())
    dual = float(b @ y)
    dual_infeas = float(max(0.0, np.max(A.T @ y - cost)))
    gap = abs(primal - dual)
    kkt = max(gap / (1.0 + primal), dual_infeas)
    converged = res.status == 0 and feas <= cfg.feasibility_tolerance and kkt <= cfg.kkt_tolerance
    return SolverResult(
        coefficients=beta,
        objective=primal,
        kkt_residual=kkt,
        feasibility_residual=feas,
        iterations=int(getattr(res, "nit", 0)),
        converged=bool(converged),
        info={"duality_gap": gap, "labeled_residual": lab, "pooled_residual": pooled,
              "labeled_bound": t_lab, "pooled_bound": t_all, "status": res.message,
              "generation_rounds": rounds},
    )


def _lp(cost, A, b, cfg):
    return linprog(
        cost, A_ub=A, b_ub=b, bounds=(0, None), method="highs-ds",
        options={
            "presolve": False,
            "primal_feasibility_tolerance": min(1e-7, cfg.feasibility_tolerance),
            "dual_feasibility_tolerance": min(1e-7, cfg.kkt_tolerance),
            "maxiter": cfg.max_iterations,
        },
    )


def _constraint_generation(A, b, cost, cfg):
    """Solve ``min cost'x, Ax <= b, x >= 0`` over a growing subset of rows.

    Only a few of the ``4d`` score constraints bind at the optimum, so the
    LP is solved on a working set that is enlarged by the most violated rows
    until the full system holds. A subset optimum that is feasible for every
    row is optimal for the full problem. Returns ``(res, y, rounds)`` with
    ``y`` the full-length dual vector (zeros off the working set).
    """
    rows = A.shape[0]
    batch = max(10, A.shape[1] // 20)
    slack = b.copy()
    work = np.zeros(rows, dtype=bool)
    work[np.argsort(slack, kind="stable")[:batch]] = True
    tol = 0.1 * cfg.feasibility_tolerance
    for rounds in range(1, MAX_GENERATION_ROUNDS + 1):
        idx = np.flatnonzero(work)
        res = _lp(cost, A[idx], b[idx], cfg)
        if res.x is None:
            break
        viol = A @ res.x - b
        viol[work] = -np.inf
        bad = np.flatnonzero(viol > tol)
        if bad.size == 0:
            y = np.zeros(rows)
            y[idx] = res.ineqlin.marginals
            return res, y, rounds
        work[bad[np.argsort(-viol[bad], kind="stable")[:batch]]] = True
    # fall back to the full system
    res = _lp(cost, A, b, cfg)
    y = res.ineqlin.marginals if res.x is not None else None
    return res, y, -1


def _infeasible(G_lab, c_lab, t_lab, G_all, c_all, t_all):
    best_lab = _chebyshev(G_lab, c_lab)
    best_all = _chebyshev(G_all, c_all)
    if best_lab > t_lab:
        return FeasibilityError(
            f"labeled constraint infeasible: smallest achievable residual {best_lab:.6g} > bound {t_lab:.6g}",
            "labeled", best_lab - t_lab)
    if best_all > t_all:
        return FeasibilityError(
            f"pooled constraint infeasible: smallest achievable residual {best_all:.6g} > bound {t_all:.6g}",
            "pooled", best_all - t_all)
    return FeasibilityError(
        "labeled and pooled constraints are individually feasible but have no common point",
        "joint", None)
