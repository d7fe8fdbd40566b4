"""Sphere geometry, spherical-harmonic dimension counts, d-dimensional Legendre
polynomials, and Gram matrices built through the addition theorem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Geometry",
    "GeometryError",
    "Dataset",
    "harmonic_dim",
    "legendre",
    "legendre_series",
    "legendre_gram",
    "sample_sphere",
]


class GeometryError(ValueError):
    """Datasets with incompatible geometries were combined."""


@dataclass(frozen=True)
class Geometry:
    """Input space: the unit sphere S^{d-1}, or a product of p patch spheres.

    ``full(d)`` is plain spherical input. ``patched(d0, p)`` is the input space
    of a one-hidden-layer convolutional kernel whose filter size and stride both
    equal the patch dimension d0; points are concatenations of p unit vectors.
    """

    kind: str  # "full" | "patched"
    d0: int    # sphere dimension of each block
    p: int = 1 # number of blocks (always 1 for "full")

    def __post_init__(self) -> None:
        if self.kind not in ("full", "patched"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "full" and self.p != 1:
            raise ValueError("full geometry has exactly one block")
        if self.d0 < 2:
            raise ValueError("sphere dimension must be >= 2")
        if self.p < 1:
            raise ValueError("patch count must be >= 1")

    @classmethod
    def full(cls, d: int) -> "Geometry":
        return cls(kind="full", d0=int(d), p=1)

    @classmethod
    def patched(cls, d0: int, p: int) -> "Geometry":
        return cls(kind="patched", d0=int(d0), p=int(p))

    @property
    def dim(self) -> int:
        """Total ambient dimension."""
        return self.d0 * self.p


@dataclass(frozen=True)
class Dataset:
    """Points on the sphere (one per row) together with their generating seed."""

    geometry: Geometry
    X: np.ndarray
    seed: int

    @property
    def m(self) -> int:
        return self.X.shape[0]


def _comb(n: int, r: int) -> int:
    if r < 0 or n < 0 or n < r:
        return 0
    return math.comb(n, r)


def harmonic_dim(geometry: Geometry, k: int) -> int:
    """Number of degree-k spherical harmonics on the geometry.

    On S^{d-1} this is N(d, k) = C(d+k-1, k) - C(d+k-3, k-2); a patched
    geometry contributes p copies of N(d0, k). Exact integer arithmetic.
    """
    if k < 1:
        raise ValueError("degree k must be >= 1")
    d = geometry.d0
    return geometry.p * (_comb(d + k - 1, k) - _comb(d + k - 3, k - 2))


def _legendre_recurrence(d: int, k: int, t: np.ndarray) -> np.ndarray:
    # (j + d - 2) P_{j+1} = (2j + d - 2) t P_j - j P_{j-1},  P_0 = 1, P_1 = t
    if k == 0:
        return np.ones_like(t)
    prev = np.ones_like(t)
    cur = t.astype(float, copy=True)
    for j in range(1, k):
        prev, cur = cur, ((2 * j + d - 2) * t * cur - j * prev) / (j + d - 2)
    return cur


def legendre(d: int, k: int, t) -> float | np.ndarray:
    """Legendre polynomial P_k in d dimensions, normalized so P_k(1) = 1.

    This is the Gegenbauer polynomial C_k^{(d-2)/2} rescaled to 1 at t = 1,
    the zonal kernel of the degree-k harmonics. Accepts scalars or arrays;
    inputs are clipped to [-1, 1] to absorb dot-product rounding.
    """
    if k < 0:
        raise ValueError("degree k must be >= 0")
    if d < 2:
        raise ValueError("dimension d must be >= 2")
    arr = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    out = _legendre_recurrence(d, k, arr)
    if np.ndim(t) == 0:
        return float(out)
    return out


def legendre_series(d: int, coeffs, t: np.ndarray) -> np.ndarray:
    """Evaluate sum_k coeffs[k-1] * P_k(t) for degrees k = 1..len(coeffs).

    One recurrence pass; there is no constant (k = 0) term.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.size == 0:
        raise ValueError("need at least one coefficient")
    prev = np.ones_like(t)
    cur = t.astype(float, copy=True)
    acc = coeffs[0] * cur
    for j in range(1, coeffs.size):
        prev, cur = cur, ((2 * j + d - 2) * t * cur - j * prev) / (j + d - 2)
        if coeffs[j] != 0.0:
            acc += coeffs[j] * cur
    return acc


def patch_average(geometry: Geometry, A: np.ndarray, B: np.ndarray, func) -> np.ndarray:
    """Apply func to the clipped per-patch dot-product matrix and average over patches.

    For the full geometry this is just func(A @ B.T) with clipping.
    """
    p, d0 = geometry.p, geometry.d0
    out = None
    for a in range(p):
        block = slice(a * d0, (a + 1) * d0)
        dots = np.clip(A[:, block] @ B[:, block].T, -1.0, 1.0)
        vals = func(dots)
        out = vals if out is None else out + vals
    if p > 1:
        out /= p
    return out


def legendre_gram(data: Dataset, data2: Dataset | None, k: int) -> np.ndarray:
    """Gram matrix of the degree-k zonal kernel between two datasets.

    Entries are P_k(x_i . x'_j) on the full sphere and the patch average
    (1/p) sum_a P_k(x_{i,a} . x'_{j,a}) on the patched geometry. By the
    addition theorem the self-Gram equals Y_k(X) Y_k(X)^T / harmonic_dim.
    """
    if k < 0:
        raise ValueError("degree k must be >= 0")
    other = data if data2 is None else data2
    if other.geometry != data.geometry:
        raise GeometryError(
            f"geometry mismatch: {data.geometry} vs {other.geometry}"
        )
    d0 = data.geometry.d0
    return patch_average(data.geometry, data.X, other.X,
                         lambda dots: _legendre_recurrence(d0, k, dots))


def sphere_points(geometry: Geometry, m: int, rng: np.random.Generator) -> np.ndarray:
    """m rows, each a concatenation of p unit vectors drawn from normalized Gaussians."""
    g = rng.standard_normal((m, geometry.p, geometry.d0))
    norms = np.linalg.norm(g, axis=2, keepdims=True)
    while np.any(norms == 0.0):  # probability zero, but never divide by it
        bad = np.nonzero(norms[:, :, 0] == 0.0)
        g[bad] = rng.standard_normal((len(bad[0]), geometry.d0))
        norms = np.linalg.norm(g, axis=2, keepdims=True)
    return (g / norms).reshape(m, geometry.dim)


def sample_sphere(geometry: Geometry, m: int, seed: int) -> Dataset:
    """Draw m iid uniform points on the geometry; deterministic given the seed."""
    if m < 1:
        raise ValueError("sample count m must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    return Dataset(geometry=geometry, X=sphere_points(geometry, m, rng), seed=int(seed))
