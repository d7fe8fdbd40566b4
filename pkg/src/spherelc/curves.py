"""Analytic bias and variance per critical degree, and the glued sample-wise
learning curve for both geometries."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Sequence

import numpy as np

from .harmonics import Geometry, harmonic_dim
from .rmt import QuadratureError, SingularRegimeError, chi_b, chi_v, effective_regime

__all__ = [
    "SpectralProfile",
    "LearningCurve",
    "bias_r",
    "variance_r",
    "err_r",
    "learning_curve",
    "local_maxima",
]


@dataclass(frozen=True)
class SpectralProfile:
    """Kernel eigencoefficients h2_k and target powers f2_k for degrees
    k = 1..k_max, plus ridge and label-noise variance.

    Degree 0 components are deliberately unsupported: both sequences start at
    the linear harmonics.
    """

    h2: tuple[float, ...]
    f2: tuple[float, ...]
    lam: float = 0.0
    noise: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "h2", tuple(float(v) for v in self.h2))
        object.__setattr__(self, "f2", tuple(float(v) for v in self.f2))
        if len(self.h2) < 1:
            raise ValueError("need at least one degree")
        if len(self.h2) != len(self.f2):
            raise ValueError("h2 and f2 must cover the same degrees")
        if any(v < 0 or not math.isfinite(v) for v in self.h2 + self.f2):
            raise ValueError("h2 and f2 entries must be finite and >= 0")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError("ridge lambda must be finite and >= 0")
        if not (self.noise >= 0 and math.isfinite(self.noise)):
            raise ValueError("noise variance must be finite and >= 0")

    @property
    def k_max(self) -> int:
        return len(self.h2)

    def h2_tail(self, r: int) -> float:
        """sum_{k>r} h2_k, truncated at k_max."""
        return float(sum(self.h2[r:]))

    def f2_tail(self, r: int) -> float:
        """sum_{k>r} f2_k, truncated at k_max."""
        return float(sum(self.f2[r:]))

    def gamma(self, r: int) -> float:
        """Effective ridge lambda + h2_tail(r)."""
        return self.lam + self.h2_tail(r)

    @classmethod
    def from_gap(cls, gap: float, k_max: int = 7, lam: float = 0.0,
                 noise: float = 0.0, f2_exponent: float = 2.0) -> "SpectralProfile":
        """Geometric kernel spectrum h2_k = gap^-(k-1) with power-law targets
        f2_k = k^-exponent."""
        if not (gap > 0 and math.isfinite(gap)):
            raise ValueError("gap must be positive and finite")
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        h2 = tuple(float(gap) ** -(k - 1) for k in range(1, k_max + 1))
        f2 = tuple(float(k) ** -float(f2_exponent) for k in range(1, k_max + 1))
        return cls(h2=h2, f2=f2, lam=float(lam), noise=float(noise))


def bias_r(profile: SpectralProfile, r: int, alpha: float) -> float:
    """B_r(alpha) = chi_B(alpha, xi_r) * f2_r + f2_tail(r)."""
    reg = effective_regime(profile, r, alpha)
    return chi_b(alpha, reg.xi) * profile.f2[r - 1] + profile.f2_tail(r)


def variance_r(profile: SpectralProfile, r: int, alpha: float) -> float:
    """V_r(alpha) = chi_V(alpha, xi_r) * (f2_tail(r) + noise)."""
    mult = profile.f2_tail(r) + profile.noise
    if mult == 0.0:
        return 0.0
    reg = effective_regime(profile, r, alpha)
    return chi_v(alpha, reg.xi) * mult


def err_r(profile: SpectralProfile, r: int, alpha: float) -> tuple[float, float, float]:
    """Average test error split (bias, variance, total) at ratio alpha.

    For the patched geometry alpha is interpreted against p * N(d0, r).
    """
    b = bias_r(profile, r, alpha)
    v = variance_r(profile, r, alpha)
    return b, v, b + v


@dataclass(frozen=True)
class LearningCurve:
    """Theory curve on a sample-size grid; total = bias + variance pointwise."""

    m: np.ndarray
    bias: np.ndarray
    variance: np.ndarray
    total: np.ndarray
    geometry: Geometry
    profile: SpectralProfile

    @property
    def points(self) -> list[tuple[int, float, float, float]]:
        """Ordered (m, bias, variance, total) tuples."""
        return list(zip(self.m.tolist(), self.bias.tolist(),
                        self.variance.tolist(), self.total.tolist()))


def _xi_or_limit(profile: SpectralProfile, r: int, alpha: float) -> float:
    """xi_r, mapping the ridgeless top-degree case gamma = 0 to +inf.

    chi_B and chi_V have validated xi -> inf limits (the point mass of the
    reference law, and a finite value away from alpha = 1), which is what the
    glued curve needs when the kernel has no spectrum above its top degree.
    """
    h2r = profile.h2[r - 1]
    if h2r == 0.0:
        return 0.0
    g = profile.gamma(r)
    if g == 0.0:
        return math.inf
    return h2r / (alpha * g)


def learning_curve(profile: SpectralProfile, geometry: Geometry,
                   m_grid: Sequence[int]) -> LearningCurve:
    """Glued curve LC(m) = sum_r [B_r(N_r/m) - (r-1) f2_r] + V_r(N_{<=r}/m).

    The bias ratio for degree r uses the degree count N_r, while the variance
    ratio uses the cumulative count N_{<=r}; the (r-1) f2_r subtraction removes
    the copies of f2_r over-counted by the lower-degree tails. Sums truncate
    at the profile's k_max, so the curve plateaus at zero residual once every
    listed degree is learned.
    """
    m_list = [int(m) for m in m_grid]
    if len(m_list) == 0:
        raise ValueError("m_grid must be nonempty")
    if any(m < 1 for m in m_list):
        raise ValueError("all sample counts must be >= 1")
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("m_grid must be strictly increasing")

    kmax = profile.k_max
    counts = [harmonic_dim(geometry, k) for k in range(1, kmax + 1)]
    cum = list(accumulate(counts))

    bias = np.empty(len(m_list))
    var = np.empty(len(m_list))
    for i, m in enumerate(m_list):
        b_sum = 0.0
        v_sum = 0.0
        for r in range(1, kmax + 1):
            try:
                f2r = profile.f2[r - 1]
                tail = profile.f2_tail(r)
                a_b = counts[r - 1] / m
                b_sum += chi_b(a_b, _xi_or_limit(profile, r, a_b)) * f2r \
                    + tail - (r - 1) * f2r
                mult = tail + profile.noise
                if mult > 0.0:
                    a_v = cum[r - 1] / m
                    v_sum += chi_v(a_v, _xi_or_limit(profile, r, a_v)) * mult
            except (SingularRegimeError, QuadratureError) as exc:
                raise type(exc)(f"degree r={r}, m={m}: {exc}") from exc
        bias[i] = b_sum
        var[i] = v_sum

    return LearningCurve(
        m=np.asarray(m_list, dtype=np.int64),
        bias=bias,
        variance=var,
        total=bias + var,
        geometry=geometry,
        profile=profile,
    )


def local_maxima(values: Sequence[float], rel_prominence: float = 1e-3) -> list[int]:
    """Indices of strict three-point local maxima with topographic prominence
    at least rel_prominence * peak value."""
    v = np.asarray(values, dtype=float)
    out: list[int] = []
    for i in range(1, len(v) - 1):
        if not (v[i] > v[i - 1] and v[i] > v[i + 1]):
            continue
        left_min = v[i]
        j = i - 1
        while j >= 0 and v[j] < v[i]:
            left_min = min(left_min, v[j])
            j -= 1
        right_min = v[i]
        j = i + 1
        while j < len(v) and v[j] < v[i]:
            right_min = min(right_min, v[j])
            j += 1
        prominence = v[i] - max(left_min, right_min)
        if prominence >= rel_prominence * abs(v[i]):
            out.append(i)
    return out
