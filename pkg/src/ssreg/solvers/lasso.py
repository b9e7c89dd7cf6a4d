"""l1-penalised least squares, ``(1/n)||y - Xb||^2 + lam * ||b||_1``."""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from ._cd import cd_solve
from .base import SolverConfig, SolverResult, as_matrix, as_vector

DEFAULT_CONFIG = SolverConfig()


def gram(X, y):
    """Return ``(Q, p) = (2X'X/n, 2X'y/n)``, the quadratic data of the Lasso."""
    n = X.shape[0]
    return (2.0 / n) * (X.T @ X), (2.0 / n) * (X.T @ y)


def critical_penalty(X, y) -> float:
    """Smallest penalty at which the all-zero vector is optimal."""
    n = X.shape[0]
    return float(np.max(np.abs(X.T @ y)) * 2.0 / n)


def _solve_gram(Q, p, lam, cfg, b0=None):
    b = np.zeros(p.shape[0]) if b0 is None else np.array(b0, dtype=float)
    r, sweeps, converged, kkt = cd_solve(Q, p, float(lam), b, cfg.max_iterations, cfg.kkt_tolerance)
    return b, r, int(sweeps), bool(converged), float(kkt)


def lasso_fit(X, y, lam, cfg: SolverConfig | None = None, *, start=None) -> SolverResult:
    """Fit the Lasso by cyclic coordinate descent with covariance updates.

    Parameters
    ----------
    X : (n, d) array
    y : (n,) array
    lam : float
        Penalty level, on the scale of the objective above (which carries no
        factor 1/2, so ``lam`` is twice scikit-learn's ``alpha``).
    cfg : SolverConfig, optional
    start : (d,) array, optional
        Initial point; the optimum does not depend on it.

    Returns
    -------
    SolverResult
        ``kkt_residual`` is the largest violation of the subgradient
        conditions ``|(2/n) X_j'(Xb - y)| <= lam`` (with sign-matched equality
        on the support). ``converged`` is False when the sweep budget ran out.
    """
    cfg = cfg or DEFAULT_CONFIG
    X = as_matrix(X, "X")
    y = as_vector(y, "y", X.shape[0])
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise InputError(f"lambda must be finite and >= 0, got {lam}")
    Q, p = gram(X, y)
    b, _, sweeps, converged, kkt = _solve_gram(Q, p, lam, cfg, start)
    resid = y - X @ b
    objective = float(resid @ resid / X.shape[0] + lam * np.abs(b).sum())
    return SolverResult(
        coefficients=b,
        objective=objective,
        kkt_residual=kkt,
        feasibility_residual=0.0,
        iterations=sweeps,
        converged=converged,
    )


def lasso_path(Q, p, lambdas, cfg: SolverConfig | None = None, *, yy=None, saturation=0.99):
    """Warm-started solutions along ``lambdas`` (any order) from Gram data.

    Returns ``(coefs, converged)`` with ``coefs`` of shape ``(len(lambdas), d)``.
    If ``yy = y'y / n`` is given, the path stops once the training fit explains
    a ``saturation`` share of ``yy``; skipped penalties get NaN rows and
    ``converged = False``.
    """
    cfg = cfg or DEFAULT_CONFIG
    lambdas = np.asarray(lambdas, dtype=float)
    coefs = np.full((lambdas.size, p.shape[0]), np.nan)
    ok = np.zeros(lambdas.size, dtype=bool)
    b = np.zeros(p.shape[0])
    for k in np.argsort(-lambdas, kind="stable"):
        b, r, _, converged, _ = _solve_gram(Q, p, lambdas[k], cfg, b)
        coefs[k] = b
        ok[k] = converged
        if yy is not None and yy > 0:
            # (1/n)||y - Xb||^2 = yy - p'b + b'Qb/2 and p - Qb = r
            rss = yy - 0.5 * float(b @ (p + r))
            if rss <= (1.0 - saturation) * yy:
                break
    return coefs, ok
