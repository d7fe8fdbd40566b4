"""Marchenko-Pastur limit law, the zeta integrals with validated closed forms,
the chi_B / chi_V error kernels, and the effective regularization of a
critical degree."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .curves import SpectralProfile

__all__ = [
    "MarchenkoPastur",
    "EffectiveRegime",
    "SingularRegimeError",
    "QuadratureError",
    "ZetaConsistencyError",
    "CLOSED_FORM",
    "QUADRATURE",
    "mp_pdf",
    "mp_cdf",
    "mp_expect",
    "adaptive_simpson",
    "zeta",
    "zeta_check",
    "chi_b",
    "chi_v",
    "effective_regime",
]

CLOSED_FORM = "closed_form"
QUADRATURE = "quadrature"


class SingularRegimeError(ArithmeticError):
    """The effective regularization is degenerate (no ridge, no spectral tail)."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class ZetaConsistencyError(ArithmeticError):
    """Closed form and quadrature disagree beyond tolerance."""


@dataclass(frozen=True)
class MarchenkoPastur:
    """The law mu_alpha: continuous density on [(1-sqrt(a))^2, (1+sqrt(a))^2]
    plus an atom of mass (1 - 1/alpha)^+ at zero."""

    alpha: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError("aspect ratio alpha must be positive and finite")

    @property
    def alpha_minus(self) -> float:
        return (1.0 - math.sqrt(self.alpha)) ** 2

    @property
    def alpha_plus(self) -> float:
        return (1.0 + math.sqrt(self.alpha)) ** 2

    @property
    def point_mass(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.alpha)


def mp_pdf(mp: MarchenkoPastur, t) -> float | np.ndarray:
    """Density of the continuous part (the atom is reported via mp.point_mass)."""
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    am, ap, a = mp.alpha_minus, mp.alpha_plus, mp.alpha
    out = np.zeros_like(arr)
    inside = (arr > am) & (arr < ap)
    ti = arr[inside]
    out[inside] = np.sqrt((ap - ti) * (ti - am)) / (2.0 * math.pi * a * ti)
    if np.ndim(t) == 0:
        return float(out[0])
    return out.reshape(np.shape(t))


def mp_cdf(mp: MarchenkoPastur, t) -> float | np.ndarray:
    """P(X <= t) under mu_alpha, atom at zero included.

    Inside the support the antiderivative of the density is, with
    phi = arccos((1 + a - t) / (2 sqrt(a))),

        sin(phi)/(pi sqrt(a)) + (1+a) phi / (2 pi a)
          - |1-a|/(pi a) * arctan( sqrt(a_+/a_-) tan(phi/2) )

    (the arctan term vanishes identically at a = 1). Validated against
    quadrature of the density in the tests.
    """
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    a = mp.alpha
    am, ap, pm = mp.alpha_minus, mp.alpha_plus, mp.point_mass
    out = np.where(arr >= 0.0, pm, 0.0)
    out = np.where(arr >= ap, 1.0, out)
    inside = (arr > am) & (arr < ap)
    if np.any(inside):
        ti = arr[inside]
        phi = np.arccos(np.clip((1.0 + a - ti) / (2.0 * math.sqrt(a)), -1.0, 1.0))
        cont = np.sin(phi) / (math.pi * math.sqrt(a)) + (1.0 + a) * phi / (2.0 * math.pi * a)
        if a != 1.0:
            cont -= (abs(1.0 - a) / (math.pi * a)) * np.arctan(
                math.sqrt(ap / am) * np.tan(phi / 2.0)
            )
        out[inside] = pm + cont
    if np.ndim(t) == 0:
        return float(out[0])
    return out.reshape(np.shape(t))


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_levels: int = 20) -> float:
    """Adaptive Simpson quadrature to absolute tolerance tol.

    Raises QuadratureError if a panel still misses its error budget after
    max_levels bisections.
    """
    fa, fm, fb = f(a), f((a + b) / 2.0), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_panel(f, a, b, fa, fm, fb, whole, tol, max_levels)


def _simpson_panel(f, a, b, fa, fm, fb, whole, tol, depth):
    m = (a + b) / 2.0
    lm, rm = (a + m) / 2.0, (m + b) / 2.0
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    if depth <= 0:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a}, {b}] (residual {abs(err):.3e})"
        )
    return (_simpson_panel(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + _simpson_panel(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1))


def mp_expect(mp: MarchenkoPastur, weight: Callable[[float], float],
              tol: float = 1e-10) -> float:
    """Integral of weight(t) against the continuous part of mu_alpha.

    Substituting t = a_- + (a_+ - a_-) sin^2(theta) removes the square-root
    endpoint singularities, leaving a smooth integrand on [0, pi/2].
    """
    a = mp.alpha
    am, ap = mp.alpha_minus, mp.alpha_plus
    delta = ap - am
    if am == 0.0:
        # alpha = 1: the 1/t pole of the density cancels against sin^2(theta)
        def g(theta: float) -> float:
            c = math.cos(theta)
            return (delta / math.pi) * c * c * weight(delta * math.sin(theta) ** 2)
    else:
        def g(theta: float) -> float:
            s2 = math.sin(theta) ** 2
            t = am + delta * s2
            sc = math.sin(theta) * math.cos(theta)
            return (delta ** 2 / (math.pi * a)) * sc * sc * weight(t) / t
    return adaptive_simpson(g, 0.0, math.pi / 2.0, tol=tol)


def _validate_zeta_args(alpha: float, xi: float, k: int) -> None:
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError("alpha must be positive and finite")
    if not (xi >= 0):
        raise ValueError("xi must be >= 0")
    if k not in (1, 2):
        raise ValueError("k must be 1 or 2")


def _zeta_closed(alpha: float, xi: float, k: int) -> float:
    mp = MarchenkoPastur(alpha)
    if xi == 0.0:
        return 1.0  # probability measure
    if math.isinf(xi):
        return mp.point_mass
    am = mp.alpha_minus
    delta = mp.alpha_plus - am
    b = (1.0 + xi * am) / (xi * delta)
    c = am / delta
    if k == 1:
        integral = math.pi * (
            (1.0 + b + c) / (math.sqrt(b * (1.0 + b)) + math.sqrt(c * (1.0 + c))) - 1.0
        )
        tail = integral / (2.0 * math.pi * alpha * xi)
    else:
        integral = math.pi / (
            2.0 * math.sqrt(b * b + b)
            * ((b + c + 2.0 * b * c) + 2.0 * math.sqrt(b * c * (1.0 + b) * (1.0 + c)))
        )
        tail = integral / (2.0 * math.pi * alpha * xi * (xi * delta))
    return mp.point_mass + tail


def _zeta_quadrature(alpha: float, xi: float, k: int, tol: float) -> float:
    mp = MarchenkoPastur(alpha)
    if math.isinf(xi):
        return mp.point_mass  # weight vanishes on the continuous support
    return mp.point_mass + mp_expect(mp, lambda t: (1.0 + xi * t) ** -k, tol=tol)


def zeta(alpha: float, xi: float, k: int, method: str = CLOSED_FORM,
         tol: float = 1e-10) -> float:
    """Integral of (1 + xi t)^{-k} against mu_alpha, atom included.

    The closed form uses the substitution constants
    b = (1 + xi a_-) / (xi (a_+ - a_-)) and c = a_- / (a_+ - a_-) with the
    prefactor (2 pi alpha xi)^{-1} (xi (a_+ - a_-))^{1-k}. The k = 1 definite
    integral is

        int_0^1 sqrt(s(1-s)) / ((s+b)(s+c)) ds
            = pi * ( (1+b+c) / (sqrt(b(1+b)) + sqrt(c(1+c))) - 1 ),

    obtained by partial fractions from
    int_0^1 sqrt(s(1-s))/(s+a) ds = (pi/2)(1 + 2a - 2 sqrt(a(1+a))); the sum
    of radicals in the denominator is regular at c = 0 (alpha = 1). Both
    closed forms are pinned to the quadrature path by zeta_check.
    """
    _validate_zeta_args(alpha, xi, k)
    if method == CLOSED_FORM:
        return _zeta_closed(alpha, xi, k)
    if method == QUADRATURE:
        return _zeta_quadrature(alpha, xi, k, tol)
    raise ValueError(f"unknown method {method!r}")


def zeta_check(alpha: float, xi: float, k: int, tol: float = 1e-8) -> float:
    """Evaluate zeta both ways; raise ZetaConsistencyError if they disagree."""
    closed = zeta(alpha, xi, k, method=CLOSED_FORM)
    quad = zeta(alpha, xi, k, method=QUADRATURE)
    if abs(closed - quad) > tol:
        raise ZetaConsistencyError(
            f"zeta({alpha}, {xi}, {k}): closed form {closed!r} vs quadrature {quad!r}"
        )
    return closed


def chi_b(alpha: float, xi: float, method: str = CLOSED_FORM) -> float:
    """Bias kernel chi_B(alpha, xi) = int (1 + xi t)^{-2} dmu_alpha."""
    return zeta(alpha, xi, 2, method=method)


def chi_v(alpha: float, xi: float, method: str = CLOSED_FORM,
          tol: float = 1e-10) -> float:
    """Variance kernel chi_V(alpha, xi) = alpha xi^2 int t (1 + xi t)^{-2} dmu_alpha.

    Computed through the identity xi^2 int t (1+xi t)^{-2} dmu
    = xi (zeta_1 - zeta_2). At xi = +inf the kernel has the finite limit
    1 / (4 s (2c + 1 + 2 s)) with c = a_-/(a_+ - a_-), s = sqrt(c^2 + c),
    except at alpha = 1 where it diverges.
    """
    _validate_zeta_args(alpha, xi, 2)
    if xi == 0.0:
        return 0.0
    if math.isinf(xi):
        mp = MarchenkoPastur(alpha)
        c = mp.alpha_minus / (mp.alpha_plus - mp.alpha_minus)
        if c == 0.0:
            raise SingularRegimeError(
                "chi_V diverges: alpha = 1 with unbounded effective regularization"
            )
        s = math.sqrt(c * c + c)
        return 1.0 / (4.0 * s * (2.0 * c + 1.0 + 2.0 * s))
    if method == QUADRATURE:
        mp = MarchenkoPastur(alpha)
        amp = alpha * xi * xi
        # tol is on the final value; the amplifier inflates quadrature error
        inner = max(tol / max(1.0, amp), 1e-15)
        return amp * mp_expect(mp, lambda t: t / (1.0 + xi * t) ** 2, tol=inner)
    if method != CLOSED_FORM:
        raise ValueError(f"unknown method {method!r}")
    return alpha * xi * (_zeta_closed(alpha, xi, 1) - _zeta_closed(alpha, xi, 2))


@dataclass(frozen=True)
class EffectiveRegime:
    """Critical-degree summary: ratio alpha, effective ridge gamma, and xi."""

    r: int
    alpha: float
    gamma: float
    xi: float


def effective_regime(profile: "SpectralProfile", r: int, alpha: float) -> EffectiveRegime:
    """xi_r = h2_r / (alpha * gamma) with gamma = lambda + sum_{k>r} h2_k.

    gamma = 0 (a ridgeless kernel with no spectrum above degree r) is a
    singular regime and raises; the learning-curve assembly handles that case
    through the xi -> infinity limits instead.
    """
    if not 1 <= r <= profile.k_max:
        raise ValueError(f"degree r={r} outside 1..{profile.k_max}")
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError("alpha must be positive and finite")
    g = profile.gamma(r)
    if g == 0.0:
        raise SingularRegimeError(
            f"gamma = lambda + h2_tail({r}) = 0: ridgeless with no high-frequency mass"
        )
    h2r = profile.h2[r - 1]
    xi = 0.0 if h2r == 0.0 else h2r / (alpha * g)
    return EffectiveRegime(r=r, alpha=float(alpha), gamma=float(g), xi=float(xi))
