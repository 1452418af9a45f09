"""Bessel functions of the first kind, their zeros, and disk harmonics.

The exact solution of the heat equation on the unit disk with zero boundary
values is a sum of disk harmonics ``Z_mn = J_m(lambda_mn r) cos(m theta)``,
each decaying like ``exp(-nu lambda_mn**2 t)``. Everything here is computed
from scratch (series / Miller recurrence), no tabulated constants.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

MAX_ORDER = 10
MAX_ARG = 50.0
MAX_ZERO_INDEX = 8

_SERIES_TERMS = 60
_RESCALE = 1e200


class DomainError(ValueError):
    """Argument outside the supported evaluation envelope."""


class NumericError(ArithmeticError):
    """An iterative special-function routine failed to converge."""


def _check_order(m) -> int:
    if int(m) != m or not 0 <= m <= MAX_ORDER:
        raise DomainError(f"Bessel order must be an integer in [0, {MAX_ORDER}], got {m}")
    return int(m)


def _series(m: int, x: np.ndarray) -> np.ndarray:
    # ascending series: sum_k (-1)^k (x/2)^(2k+m) / (k! (k+m)!)
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total = term.copy()
    q = -half * half
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + m))
        total += term
    return total


def _miller(m: int, x: np.ndarray) -> np.ndarray:
    # downward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized by
    # J_0 + 2 * sum_{k>=1} J_{2k} = 1
    xmax = float(x.max())
    start = max(m, int(xmax)) + int(math.sqrt(40.0 * max(m, xmax))) + 10
    start += start % 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    for k in range(start, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalized J_{k-1}
        if (k - 1) == m:
            result = j_cur.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        big = np.abs(j_cur) > _RESCALE
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            result *= scale
    norm += j_cur  # J_0 term
    return result / norm


def _bessel_j_unchecked(m: int, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    small = x <= m + 2
    if small.any():
        out[small] = _series(m, x[small])
    if (~small).any():
        out[~small] = _miller(m, x[~small])
    return out


def bessel_j(m: int, x):
    """J_m(x) for integer 0 <= m <= 10 and 0 <= x <= 50, scalar or array."""
    m = _check_order(m)
    arr = np.asarray(x, dtype=float)
    if arr.size and (np.any(~np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > MAX_ARG):
        raise DomainError(f"Bessel argument must lie in [0, {MAX_ARG}]")
    flat = arr.reshape(-1)
    out = _bessel_j_unchecked(m, flat).reshape(arr.shape)
    if np.ndim(x) == 0:
        return float(out)
    return out


def _j_scalar(m: int, x: float) -> float:
    return float(_bessel_j_unchecked(m, np.array([x]))[0])


def _j_prime(m: int, x: float) -> float:
    # J_m'(x) = (m/x) J_m(x) - J_{m+1}(x)
    return (m / x) * _j_scalar(m, x) - _j_scalar(m + 1, x)


def mcmahon_guess(m: int, n: int) -> float:
    beta = (n + 0.5 * m - 0.25) * math.pi
    return beta - (4.0 * m * m - 1.0) / (8.0 * beta)


def _count_zeros_below(m: int, x: float, step: float = 0.05) -> int:
    # sign changes of J_m on (0, x); zeros of J_m are separated by more than pi
    if x <= step:
        return 0
    grid = np.arange(step, x, step)
    if grid.size < 2:
        return 0
    vals = _bessel_j_unchecked(m, grid)
    return int(np.count_nonzero(np.signbit(vals[:-1]) != np.signbit(vals[1:])))


def _newton(m: int, x0: float, maxiter: int = 50) -> float | None:
    x = x0
    for _ in range(maxiter):
        if not 0.0 < x < MAX_ARG:
            return None
        step = _j_scalar(m, x) / _j_prime(m, x)
        x -= step
        if abs(step) <= 4e-16 * abs(x):
            return x
    return None


def _bisect(m: int, a: float, b: float) -> float:
    fa = _j_scalar(m, a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        fm = _j_scalar(m, mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


@lru_cache(maxsize=None)
def bessel_zero(m: int, n: int) -> float:
    """The n-th positive zero of J_m (n >= 1).

    Newton from the McMahon asymptotic guess; if Newton fails or lands on the
    wrong zero, fall back to bisection on a sign-change bracket.
    """
    m = _check_order(m)
    if int(n) != n or not 1 <= n <= MAX_ZERO_INDEX:
        raise DomainError(f"zero index must be in [1, {MAX_ZERO_INDEX}], got {n}")
    n = int(n)
    root = _newton(m, mcmahon_guess(m, n))
    if root is not None and _count_zeros_below(m, root - 0.1) == n - 1 \
            and _count_zeros_below(m, root + 0.1) == n:
        return root

    step = 0.05
    x = step
    found = 0
    prev = _j_scalar(m, x)
    while x < MAX_ARG:
        cur = _j_scalar(m, x + step)
        if (cur < 0) != (prev < 0):
            found += 1
            if found == n:
                root = _bisect(m, x, x + step)
                polished = _newton(m, root, maxiter=5)
                if polished is not None and abs(polished - root) < step:
                    root = polished
                if abs(_j_scalar(m, root)) > 1e-12:
                    raise NumericError(f"zero ({m}, {n}) did not converge")
                return root
        prev = cur
        x += step
    raise NumericError(f"could not bracket zero ({m}, {n})")


def to_polar(points) -> tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    return r, theta


@dataclass(frozen=True)
class DiskHarmonic:
    """Z_mn(r, theta) = J_m(lambda_mn r) cos(m theta); vanishes on the unit circle."""

    m: int
    n: int
    lam: float

    @classmethod
    def of(cls, m: int, n: int) -> "DiskHarmonic":
        return cls(m, n, bessel_zero(m, n))

    def __call__(self, points) -> np.ndarray:
        return harmonic_eval(self, points)


def harmonic_eval(h: DiskHarmonic, points) -> np.ndarray:
    r, theta = to_polar(points)
    # rounding can push |x| a hair past 1 on boundary samples
    arg = np.minimum(h.lam * r, h.lam)
    radial = _bessel_j_unchecked(h.m, arg)
    if h.m == 0:
        return radial
    return radial * np.cos(h.m * theta)


def harmonic_laplacian(h: DiskHarmonic, points) -> np.ndarray:
    return -(h.lam**2) * harmonic_eval(h, points)


@dataclass(frozen=True)
class ModalExpansion:
    """Finite sum of (harmonic, coefficient) terms."""

    terms: tuple[tuple[DiskHarmonic, float], ...]

    @classmethod
    def from_indices(cls, spec: Sequence[tuple[int, int, float]]) -> "ModalExpansion":
        return cls(tuple((DiskHarmonic.of(m, n), float(c)) for m, n, c in spec))

    def __len__(self) -> int:
        return len(self.terms)

    def eval(self, points, decay: Sequence[float] | None = None) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        out = np.zeros(len(pts))
        for k, (h, c) in enumerate(self.terms):
            f = c if decay is None else c * decay[k]
            out += f * harmonic_eval(h, pts)
        return out

    def laplacian(self, points, decay: Sequence[float] | None = None) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        out = np.zeros(len(pts))
        for k, (h, c) in enumerate(self.terms):
            f = c if decay is None else c * decay[k]
            out += f * harmonic_laplacian(h, pts)
        return out

    def __call__(self, points) -> np.ndarray:
        return self.eval(points)


@dataclass(frozen=True)
class ExactSolution:
    expansion: ModalExpansion
    nu: float

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("diffusivity must be positive")

    def decay(self, t: float) -> list[float]:
        if t < 0:
            raise ValueError("t must be nonnegative")
        return [math.exp(-self.nu * h.lam**2 * t) for h, _ in self.expansion.terms]

    def eval(self, t: float, points) -> np.ndarray:
        return self.expansion.eval(points, self.decay(t))

    def laplacian(self, t: float, points) -> np.ndarray:
        return self.expansion.laplacian(points, self.decay(t))

    def __call__(self, t: float, points) -> np.ndarray:
        return self.eval(t, points)


def exact_solution_eval(sol: ExactSolution, t: float, points) -> np.ndarray:
    return sol.eval(t, points)


EXPERIMENT1_TERMS = (
    (0, 1, 1.0), (0, 2, -1 / 4), (0, 3, 1 / 16), (0, 4, -1 / 64),
    (1, 1, 1.0), (1, 2, -1 / 2), (1, 3, 1 / 4), (1, 4, -1 / 8),
    (2, 1, 1.0), (3, 1, 1.0), (4, 1, 1.0),
)


def experiment1_expansion() -> ModalExpansion:
    """Initial condition shared by both heat-equation experiments (global factor 1/4)."""
    return ModalExpansion.from_indices([(m, n, c / 4) for m, n, c in EXPERIMENT1_TERMS])


def single_mode_expansion(m: int = 0, n: int = 1, coeff: float = 1.0) -> ModalExpansion:
    return ModalExpansion.from_indices([(m, n, coeff)])
