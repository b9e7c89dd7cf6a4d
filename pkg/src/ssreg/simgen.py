"""Simulation designs (Models M1-M7) with known target coefficient.

Outcomes are drawn for labeled rows only. Dimensions may be overridden to
build scaled-down analogs; coefficient patterns are then truncated (sparse
parts keep ``min(declared, d)`` entries) or rescaled proportionally, and the
instance is flagged as not paper-scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import SemiSupervisedDataset
from .errors import InputError
from .rng import normal, stream

MODELS = ("M1", "M2", "M3", "M4", "M5", "M6", "M7")

# (d, n, m) used for the published tables; M1 was also run with m in {0, 250, 500}.
PAPER_SCALE = {
    "M1": (499, 300, 1000),
    "M2": (499, 300, 1000),
    "M3": (499, 150, 1500),
    "M4": (399, 150, 1500),
    "M5": (499, 300, 1000),
    "M6": (499, 300, 1000),
    "M7": (399, 350, 1000),
}

_THETA = {"M1": 0.4, "M2": 0.4, "M3": 0.8, "M4": 2.0, "M5": 0.4, "M6": 0.4, "M7": 0.4}


@dataclass(frozen=True)
class ScenarioSpec:
    model_id: str
    n: int
    m: int
    d: int
    seed: int = 0
    s: int | None = None  # optional override of the auxiliary-model sparsity

    def __post_init__(self):
        if self.model_id not in MODELS:
            raise InputError(f"unknown model {self.model_id!r}; valid models: {', '.join(MODELS)}")
        if self.n < 2 or self.m < 0 or self.d < 1:
            raise InputError("need n >= 2, m >= 0 and d >= 1")
        if self.s is not None and not 1 <= self.s <= self.d:
            raise InputError(f"s must lie in [1, d], got {self.s}")
        minimum = {"M4": 5, "M5": 10, "M7": 9}.get(self.model_id, 1)
        if self.model_id in ("M1", "M2", "M5", "M6") and self.s is None:
            minimum = max(minimum, 25)
        if self.d < minimum:
            raise InputError(f"{self.model_id} needs d >= {minimum}, got {self.d}")

    @property
    def paper_scale(self) -> bool:
        d, n, m = PAPER_SCALE[self.model_id]
        ok_m = self.m in ((0, 250, 500, 1000) if self.model_id == "M1" else (m,))
        return self.d == d and self.n == n and ok_m and self.s in (None, declared_sparsity(self)[0])


@dataclass(frozen=True, eq=False)
class GeneratedInstance:
    dataset: SemiSupervisedDataset
    theta_true: float
    beta_support: int
    gamma_support: int
    paper_scale: bool


def true_theta(model_id: str) -> float:
    """Coefficient on Z in the outcome equation of ``model_id``."""
    try:
        return _THETA[model_id]
    except KeyError:
        raise InputError(f"unknown model {model_id!r}; valid models: {', '.join(MODELS)}") from None


def declared_sparsity(spec: ScenarioSpec):
    """``(s, k)`` = (support of beta*, support of gamma*) for the scenario's dimensions."""
    d, mid = spec.d, spec.model_id
    if mid in ("M1", "M2", "M5", "M6"):
        s = spec.s if spec.s is not None else min(25, d)
        k = {"M1": 1 + min(9, d), "M5": 10}.get(mid, d + 1)
    elif mid == "M3":
        s, k = (spec.s if spec.s is not None else d), d + 1
    elif mid == "M4":
        s, k = 1, 5
    else:
        s, k = (spec.s if spec.s is not None else 9), 5
    return s, k


def equicorrelated(gen, rows, d, mu):
    """Rows from N(0, (1-mu) I + mu 11') as sqrt(1-mu) G + sqrt(mu) g 1."""
    G = normal(gen, (rows, d))
    g = normal(gen, (rows, 1))
    return np.sqrt(1.0 - mu) * G + np.sqrt(mu) * g


def banded_shift(gen, rows, d, mean=1.0, width=5, off=0.1):
    """Rows from N(mean * 1, I + off * 1{1 <= |i-l| <= width})."""
    idx = np.arange(d)
    lag = np.abs(idx[:, None] - idx[None, :])
    cov = np.eye(d) + off * ((lag >= 1) & (lag <= width))
    L = np.linalg.cholesky(cov)
    return mean + normal(gen, (rows, d)) @ L.T


def ar1(gen, rows, dim, rho):
    """Rows from N(0, Sigma) with Sigma_jk = rho^|j-k| by the AR(1) recursion."""
    E = normal(gen, (rows, dim))
    out = np.empty_like(E)
    out[:, 0] = E[:, 0]
    c = np.sqrt(1.0 - rho * rho)
    for j in range(1, dim):
        out[:, j] = rho * out[:, j - 1] + c * E[:, j]
    return out


def generate(spec: ScenarioSpec) -> GeneratedInstance:
    """Draw one instance; identical specs give identical instances."""
    n, m, d, mid = spec.n, spec.m, spec.d, spec.model_id
    N = n + m
    gen = stream(spec.seed, f"simgen:{mid}")
    s, k = declared_sparsity(spec)
    theta = true_theta(mid)

    if mid == "M4":
        X = ar1(gen, N, d + 1, 0.3)
        Z, W = X[:, 0], X[:, 1:].copy()
        W[:, 0] = np.abs(W[:, 0])
        eps = normal(gen, n)
        Wl = W[:n]
        Y = 0.6 * (Wl[:, 0] + Wl[:, 1]) ** 2 + 0.4 * Wl[:, 3] ** 3 - Wl[:, 4] + 2.0 * Z[:n] + eps
    elif mid == "M7":
        Wl = equicorrelated(gen, n, d, 1.0 / (d + 1))
        Wu = banded_shift(gen, m, d)
        W = np.vstack([Wl, Wu])
        v = np.concatenate([normal(gen, n, 0.8), normal(gen, m, 1.2)])
        Z = -0.4 * W[:, :s].sum(axis=1) + v
        eps = normal(gen, n, 0.4)
        Y = 0.4 * Z[:n] + 0.4 * Wl[:, :4].sum(axis=1) + eps
    else:
        W = equicorrelated(gen, N, d, 1.0 / (d + 1))
        v = normal(gen, N)
        Z = -W[:, :s].sum(axis=1) / np.sqrt(s) + v
        Wl, Zl = W[:n], Z[:n]
        if mid == "M1":
            eps = normal(gen, n, 0.4)
            Y = 0.4 * Zl + Wl[:, :9].sum(axis=1) / np.sqrt(10.0) + eps
        elif mid in ("M2", "M3"):
            eps = normal(gen, n, 0.4)
            Y = theta * Zl + Wl.sum(axis=1) / np.sqrt(d + 1.0) + eps
        elif mid == "M5":
            eps = normal(gen, n, 0.2)
            # 1-based W_j W_{j+1} for j = 4..9
            inter = sum(Wl[:, j - 1] * Wl[:, j] for j in range(4, 10))
            Y = 0.4 * Zl + 0.4 * Wl[:, :4].sum(axis=1) + 0.4 * inter + eps
        else:  # M6
            eps = normal(gen, n, 0.2)
            L = max(1, min(d - 1, int(round(399 * d / 499))))
            inter = (Wl[:, L - 1:d - 1] * Wl[:, L:d]).sum(axis=1)
            Y = 0.4 * Zl + 0.06 * Wl[:, :L].sum(axis=1) + 0.03 * inter + eps

    data = SemiSupervisedDataset(Z[:n], W[:n], Y, Z[n:], W[n:])
    return GeneratedInstance(data, theta, s, k, spec.paper_scale)
