"""Heat operator, Dirichlet-penalized loss, and the function-space residual."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class HeatOperator:
    """L u = nu * (u_x1x1 + u_x2x2)."""

    nu: float = 0.1

    def __post_init__(self):
        if not (np.isfinite(self.nu) and self.nu > 0):
            raise ValueError("diffusivity nu must be positive")


def zero_boundary(points) -> np.ndarray:
    return np.zeros(np.asarray(points).reshape(-1, 2).shape[0])


@dataclass(frozen=True)
class DirichletBC:
    boundary_value: Callable[[np.ndarray], np.ndarray] = zero_boundary
    lambda_d: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lambda_d) and self.lambda_d >= 0):
            raise ValueError("lambda_d must be finite and nonnegative")


@dataclass(frozen=True)
class LossReport:
    interior_term: float
    boundary_term: float
    lambda_d: float

    @property
    def total(self) -> float:
        return self.interior_term + self.lambda_d * self.boundary_term


@dataclass(frozen=True)
class ResidualField:
    interior_delta_u: np.ndarray
    boundary_delta_u: np.ndarray
    alpha: float


def apply_operator(op: HeatOperator, ansatz, theta, points) -> np.ndarray:
    return op.nu * ansatz.laplacian(theta, points)


def _vec(a) -> np.ndarray:
    return np.asarray(a, dtype=float).reshape(-1)


def loss(u_hat_interior, u_target_interior, u_hat_boundary, bc: DirichletBC,
         boundary_points) -> LossReport:
    """Mean-square interior mismatch plus lambda_d times mean-square boundary mismatch."""
    ui, ti, ub = _vec(u_hat_interior), _vec(u_target_interior), _vec(u_hat_boundary)
    if ui.shape != ti.shape:
        raise ValueError(f"interior length mismatch: {ui.shape} vs {ti.shape}")
    ud = _vec(bc.boundary_value(boundary_points)) if ub.size else ub
    if ub.shape != ud.shape:
        raise ValueError(f"boundary length mismatch: {ub.shape} vs {ud.shape}")
    interior = float(np.mean((ui - ti) ** 2)) if ui.size else 0.0
    boundary = float(np.mean((ub - ud) ** 2)) if ub.size else 0.0
    return LossReport(interior, boundary, bc.lambda_d)


def functional_gradient(u_hat, u_target, u_hat_boundary, bc: DirichletBC, alpha: float,
                        boundary_points) -> ResidualField:
    """Delta u = alpha * (target - u_hat) on interior and boundary samples.

    The 2/N factor of the mean-square derivative is left to the least-squares
    row weights, so alpha = 1 is a full projection step.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    ui, ti, ub = _vec(u_hat), _vec(u_target), _vec(u_hat_boundary)
    ud = _vec(bc.boundary_value(boundary_points)) if ub.size else ub
    return ResidualField(alpha * (ti - ui), alpha * (ud - ub), alpha)


def relative_l2(u_hat, u_exact, weights=None) -> float:
    """sqrt(sum w (u_hat - u)^2) / sqrt(sum w u^2)."""
    uh, ue = _vec(u_hat), _vec(u_exact)
    if uh.shape != ue.shape:
        raise ValueError(f"length mismatch: {uh.shape} vs {ue.shape}")
    w = np.ones_like(ue) if weights is None else _vec(weights)
    if w.shape != ue.shape:
        raise ValueError("weights length mismatch")
    ref = float(np.sum(w * ue * ue))
    if not ref > 0:
        raise ValueError("reference field has zero norm")
    return float(np.sqrt(np.sum(w * (uh - ue) ** 2) / ref))
