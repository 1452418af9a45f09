"""Weighted, ridge-regularized least squares through the normal equations.

The natural-gradient update fits a function-space residual ``du`` with the
model's tangent directions (columns of ``J``). Samples vastly outnumber
parameters, so we form the P x P Gram matrix and factor it with Cholesky.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

_TINY = np.finfo(float).tiny
_RIDGE_DOUBLINGS = 8
_ZERO_RIDGE_FALLBACK = 1e-12


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


class LeastSquaresError(RuntimeError):
    def __init__(self, msg: str, condition_estimate: float = float("inf")):
        super().__init__(msg)
        self.condition_estimate = condition_estimate


@dataclass(frozen=True)
class LsqSolution:
    delta_theta: np.ndarray
    residual_norm: float
    gram_condition_estimate: float
    ridge_used: float = 0.0


def _as_matrix(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or min(J.shape) < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {J.shape}")
    if not np.all(np.isfinite(J)):
        raise ValueError("matrix has non-finite entries")
    return J


def _as_weights(weights, n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise ValueError(f"weights have length {w.shape[0]}, matrix has {n} rows")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    return w


def gram(J, weights, block_rows: int | None = None) -> np.ndarray:
    """J^T diag(w) J, symmetrized to the bit.

    ``block_rows`` accumulates over row blocks in order (deterministic for a
    fixed block size); the default is a single block.
    """
    J = _as_matrix(J)
    w = _as_weights(weights, J.shape[0])
    Js = J * np.sqrt(w)[:, None]
    if block_rows is None or block_rows >= J.shape[0]:
        G = Js.T @ Js
    else:
        G = np.zeros((J.shape[1], J.shape[1]))
        for start in range(0, J.shape[0], block_rows):
            blk = Js[start:start + block_rows]
            G += blk.T @ blk
    return 0.5 * (G + G.T)


def cholesky(A) -> np.ndarray:
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc


def condition_estimate(L: np.ndarray) -> float:
    d = np.abs(np.diag(L))
    return float((d.max() / d.min()) ** 2)


def solve_spd(A, b) -> np.ndarray:
    A = _as_matrix(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
        raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}")
    L = cholesky(A)
    return cho_solve((L, True), b)


def solve_ridge_lsq(J, weights, du, ridge: float = 1e-8) -> LsqSolution:
    """Minimize sum_i w_i (du_i - (J dtheta)_i)^2 + ridge * s * |dtheta|^2.

    ``s = trace(J^T W J) / P`` makes the ridge relative to the problem scale.
    If Cholesky fails the ridge is doubled, up to 8 times.
    """
    J = _as_matrix(J)
    n, p = J.shape
    w = _as_weights(weights, n)
    du = np.asarray(du, dtype=float).reshape(-1)
    if du.shape[0] != n:
        raise ValueError(f"du has length {du.shape[0]}, matrix has {n} rows")
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")

    G = gram(J, w)
    rhs = J.T @ (w * du)
    scale = max(np.trace(G) / p, _TINY)
    eye = np.eye(p)

    rel = ridge
    L = None
    for _ in range(_RIDGE_DOUBLINGS + 1):
        try:
            L = cholesky(G + (rel * scale) * eye if rel > 0 else G)
            break
        except NotPositiveDefiniteError:
            rel = 2.0 * rel if rel > 0 else _ZERO_RIDGE_FALLBACK
    if L is None:
        d = np.diag(G)
        cond = float(d.max() / max(d.min(), _TINY))
        raise LeastSquaresError(
            f"Gram factorization failed after {_RIDGE_DOUBLINGS} ridge doublings "
            f"(relative ridge {rel:.3g})", cond)

    dtheta = cho_solve((L, True), rhs)
    r = du - J @ dtheta
    return LsqSolution(
        delta_theta=dtheta,
        residual_norm=float(np.sqrt(np.sum(w * r * r))),
        gram_condition_estimate=condition_estimate(L),
        ridge_used=rel,
    )
