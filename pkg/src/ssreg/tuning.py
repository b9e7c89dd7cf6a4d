"""Penalty selection: K-fold cross-validation and the feasibility path."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FeasibilityError, InputError
from .rng import stream
from .solvers import SolverConfig, lasso_path, min_feasible_bound
from .solvers.lasso import critical_penalty

GRID_SIZE = 50
GRID_RATIO = 1e-4


@dataclass(frozen=True)
class Fixed:
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value) or self.value < 0:
            raise InputError(f"fixed penalty must be finite and >= 0, got {self.value}")


@dataclass(frozen=True)
class CrossValidated:
    folds: int = 5
    grid: tuple | None = None  # explicit penalties; default is a log grid below lambda_max

    def __post_init__(self):
        if self.folds < 2:
            raise InputError("cross-validation needs at least 2 folds")


@dataclass(frozen=True)
class FeasibilityPath:
    grid: tuple | None = None  # explicit penalties; default is relative to ||xi||_inf
    safety_factor: float = 1.5

    def __post_init__(self):
        if not self.safety_factor > 0:
            raise InputError("safety_factor must be positive")


def log_grid(lam_max: float, size: int = GRID_SIZE, ratio: float = GRID_RATIO) -> np.ndarray:
    """Descending log-spaced grid on ``[ratio * lam_max, lam_max]``."""
    if size == 1:
        return np.array([lam_max])
    return lam_max * np.logspace(0.0, np.log10(ratio), size)


def fold_ids(n: int, folds: int, seed: int, tag: str = "cv") -> np.ndarray:
    """Balanced fold labels for ``n`` rows."""
    if n < folds:
        raise InputError(f"cannot form {folds} folds from {n} rows")
    labels = np.empty(n, dtype=int)
    for k, part in enumerate(np.array_split(stream(seed, tag).permutation(n), folds)):
        labels[part] = k
    return labels


def cv_lasso_penalty(X, y, folds: int = 5, seed: int = 0, grid=None, cfg: SolverConfig | None = None,
                     tag: str = "cv"):
    """Penalty minimising K-fold out-of-fold squared prediction error.

    Returns ``(lam, info)``; ``info`` holds the grid, the mean CV errors and
    the number of path fits that hit the iteration budget. Ties go to the
    larger penalty. Penalties below the point where a fold's training fit
    saturates are not fitted and score as infinite error.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if grid is None:
        lam_max = critical_penalty(X, y)
        if lam_max == 0.0:
            return 0.0, {"grid": np.zeros(1), "cv_error": np.zeros(1), "unconverged": 0}
        grid = log_grid(lam_max)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 1:
        return float(grid[0]), {"grid": grid, "cv_error": np.full(1, np.nan), "unconverged": 0}
    labels = fold_ids(X.shape[0], folds, seed, tag)
    G_full = X.T @ X
    c_full = X.T @ y
    err = np.zeros(grid.size)
    unconverged = 0
    for k in range(folds):
        hold = labels == k
        Xh, yh = X[hold], y[hold]
        n_train = X.shape[0] - Xh.shape[0]
        Q = (2.0 / n_train) * (G_full - Xh.T @ Xh)
        p = (2.0 / n_train) * (c_full - Xh.T @ yh)
        yy = float(y @ y - yh @ yh) / n_train
        coefs, ok = lasso_path(Q, p, grid, cfg, yy=yy)
        computed = ~np.isnan(coefs[:, 0]) if coefs.shape[1] else np.ones(grid.size, bool)
        unconverged += int((computed & ~ok).sum())
        resid = yh[:, None] - Xh @ np.nan_to_num(coefs).T
        err += np.where(computed, (resid ** 2).sum(axis=0), np.inf)
    err /= X.shape[0]
    err = np.where(np.isfinite(err), err, np.inf)
    # prefer the largest penalty among exact ties
    ties = np.flatnonzero(err == err.min())
    best = int(ties[np.argmax(grid[ties])])
    return float(grid[best]), {"grid": grid, "cv_error": err, "unconverged": unconverged}


def default_u_grid(xi) -> np.ndarray:
    scale = float(np.max(np.abs(xi))) if np.size(xi) else 0.0
    return np.sort(log_grid(scale))


def feasibility_path_penalty(Sigma_hat, xi_hat, grid=None, safety_factor: float = 1.5, is_feasible=None) -> float:
    """Smallest grid value at which the l-infinity program is feasible, times ``safety_factor``.

    ``is_feasible(lam)`` adds constraints beyond the l-infinity one (e.g. a
    row cap). Feasibility is monotone in ``lam``, so the grid is bisected.
    """
    grid = default_u_grid(xi_hat) if grid is None else np.sort(np.asarray(grid, dtype=float))
    bound = min_feasible_bound(Sigma_hat, xi_hat)
    ok = grid[grid >= bound]
    if is_feasible is not None and ok.size:
        lo, hi = 0, ok.size
        while lo < hi:
            mid = (lo + hi) // 2
            if is_feasible(float(ok[mid])):
                hi = mid
            else:
                lo = mid + 1
        ok = ok[lo:]
    if ok.size == 0:
        raise FeasibilityError(
            f"no grid value is feasible (largest {grid.max():.6g}, l-infinity bound {bound:.6g}); "
            "extend the grid upward", "linf_residual", max(bound - grid.max(), 0.0))
    return float(ok[0] * safety_factor)
