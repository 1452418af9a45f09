"""Seeded sample sets on the unit disk and evaluation lattices.

Random numbers come from SplitMix64 used as a counter-based generator: the
k-th 64-bit output for seed s is ``mix(s + (k + 1) * 0x9E3779B97F4A7C15)``
(mod 2**64), where ``mix`` is the standard SplitMix64 finalizer. This is the
same sequence as the usual sequential SplitMix64 seeded with s, and it
vectorizes trivially. Doubles in [0, 1) take the top 53 bits.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Outputs ``offset .. offset + n - 1`` of SplitMix64 seeded with ``seed``."""
    k = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + k * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform01(seed: int, n: int, offset: int = 0) -> np.ndarray:
    return (splitmix64(seed, n, offset) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def sample_disk(n: int, seed: int) -> np.ndarray:
    """n i.i.d. uniform points in the open unit disk, shape (n, 2)."""
    if n < 1:
        raise ValueError("n must be positive")
    u = uniform01(seed, 2 * n).reshape(n, 2)
    r = np.sqrt(u[:, 0])
    ang = 2.0 * np.pi * u[:, 1]
    pts = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    # r <= 1 - 2**-53; rounding of cos/sin can still land on the circle
    on_edge = np.einsum("ij,ij->i", pts, pts) >= 1.0
    pts[on_edge] *= 1.0 - 2.0**-50
    return pts


def sample_circle(n_b: int, seed: int) -> np.ndarray:
    """Stratified points on the unit circle: angle 2 pi (k + u_k) / n_b."""
    if n_b < 1:
        raise ValueError("n_b must be positive")
    u = uniform01(seed, n_b)
    ang = 2.0 * np.pi * (np.arange(n_b) + u) / n_b
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


@dataclass(frozen=True)
class SampleSet:
    interior: np.ndarray
    boundary: np.ndarray
    interior_seed: int
    boundary_seed: int

    @property
    def n_interior(self) -> int:
        return self.interior.shape[0]

    @property
    def n_boundary(self) -> int:
        return self.boundary.shape[0]

    @property
    def interior_weights(self) -> np.ndarray:
        return np.full(self.n_interior, np.pi / self.n_interior)

    @property
    def boundary_weights(self) -> np.ndarray:
        return np.full(self.n_boundary, 2.0 * np.pi / self.n_boundary)


def make_samples(n: int, n_boundary: int | None = None, seed: int = 4321,
                 boundary_seed: int | None = None) -> SampleSet:
    """Interior + boundary sample set; defaults to n // 8 boundary points."""
    if n_boundary is None:
        n_boundary = max(1, n // 8)
    if boundary_seed is None:
        boundary_seed = seed + 1
    interior = sample_disk(n, seed)
    boundary = sample_circle(n_boundary, boundary_seed)
    interior.setflags(write=False)
    boundary.setflags(write=False)
    return SampleSet(interior, boundary, seed, boundary_seed)


def export_samples(samples: SampleSet, path) -> None:
    """Debug dump, one ``x1 x2 w`` line per point, interior first."""
    rows = [(p, w) for p, w in zip(samples.interior, samples.interior_weights)]
    rows += [(p, w) for p, w in zip(samples.boundary, samples.boundary_weights)]
    with open(Path(path), "w") as fh:
        for (x1, x2), w in rows:
            fh.write(f"{float(x1)!r} {float(x2)!r} {float(w)!r}\n")


@dataclass(frozen=True)
class EvalGrid:
    """Square lattice on [-1, 1]^2; ``points`` are the nodes with |x| <= 1.

    ``mask[j, i]`` refers to the node (coords[i], coords[j]): rows run along
    x2, columns along x1, both ascending. ``points`` is in that row-major order.
    """

    resolution: int
    coords: np.ndarray
    mask: np.ndarray
    points: np.ndarray

    @property
    def spacing(self) -> float:
        return 2.0 / (self.resolution - 1)


def make_grid(resolution: int) -> EvalGrid:
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    R = resolution
    # integer lattice keeps the mask exactly symmetric
    k = 2 * np.arange(R) - (R - 1)
    coords = k / (R - 1)
    K1, K2 = np.meshgrid(k, k)
    mask = K1 * K1 + K2 * K2 <= (R - 1) ** 2
    X1, X2 = np.meshgrid(coords, coords)
    points = np.stack([X1[mask], X2[mask]], axis=1)
    return EvalGrid(R, coords, mask, points)
