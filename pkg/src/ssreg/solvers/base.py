"""Configuration and result containers for the convex solvers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budget and tolerances shared by every solver.

    ``kkt_tolerance`` bounds the stationarity residual of the coordinate
    descent solvers and the relative duality gap of the LP/QP routes;
    ``feasibility_tolerance`` bounds constraint violations.
    """

    max_iterations: int = 100_000
    kkt_tolerance: float = 1e-6
    feasibility_tolerance: float = 1e-8

    def __post_init__(self):
        if self.max_iterations <= 0:
            raise InputError("max_iterations must be positive")
        if not self.kkt_tolerance > 0 or not self.feasibility_tolerance > 0:
            raise InputError("solver tolerances must be positive")


@dataclass(frozen=True)
class SolverResult:
    coefficients: np.ndarray
    objective: float
    kkt_residual: float
    feasibility_residual: float
    iterations: int
    converged: bool
    # Extra certificates (duality gap, solver status, ...).
    info: dict = field(default_factory=dict, compare=False)


def as_matrix(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise InputError(f"{name} must be a 2-d array, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise InputError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contains non-finite entries")
    return X


def as_vector(y, name="y", length=None) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise InputError(f"{name} must be a 1-d array, got shape {y.shape}")
    if length is not None and y.shape[0] != length:
        raise InputError(f"{name} has length {y.shape[0]}, expected {length}")
    if not np.all(np.isfinite(y)):
        raise InputError(f"{name} contains non-finite entries")
    return y
