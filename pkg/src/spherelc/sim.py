"""Monte Carlo machinery: kernel matrices from sampled data, random polynomial
targets, kernel ridge regression with a ridgeless jitter ladder, empirical test
error, and empirical spectra scored against the Marchenko-Pastur law."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .curves import SpectralProfile
from .harmonics import (
    Dataset,
    Geometry,
    GeometryError,
    harmonic_dim,
    legendre_gram,
    legendre_series,
    patch_average,
    sample_sphere,
    sphere_points,
)
from .rmt import MarchenkoPastur, mp_cdf

__all__ = [
    "TargetFunction",
    "SpectrumResult",
    "MseResult",
    "FactorizationError",
    "DegenerateTargetError",
    "build_kernel",
    "sample_target",
    "ridge_solve",
    "krr_predict",
    "empirical_mse",
    "empirical_spectrum",
    "ks_distance",
]

# diagonal jitter multipliers (of trace/m) tried in order for ridgeless solves
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)


class FactorizationError(ArithmeticError):
    """Cholesky failed for every jitter level; carries the attempted ladder."""

    def __init__(self, message: str, jitters: tuple[float, ...]):
        super().__init__(message)
        self.jitters = jitters


class DegenerateTargetError(ArithmeticError):
    """A target component has (numerically) zero second moment."""


def build_kernel(train: Dataset, test: Dataset | None,
                 profile: SpectralProfile) -> np.ndarray:
    """Kernel matrix with entries sum_k h2_k P_k(x . x') (patch-averaged on the
    patched geometry). Rows index ``train``, columns index ``test`` (or
    ``train`` again for the symmetric self-kernel)."""
    other = train if test is None else test
    if other.geometry != train.geometry:
        raise GeometryError(
            f"geometry mismatch: {train.geometry} vs {other.geometry}"
        )
    d0 = train.geometry.d0
    h2 = profile.h2
    return patch_average(train.geometry, train.X, other.X,
                         lambda dots: legendre_series(d0, h2, dots))


def _window_products(X: np.ndarray, k: int) -> np.ndarray:
    """Column j holds prod_{o=0}^{k-1} x_{(j+o) mod d}; windows wrap cyclically."""
    prod = X.copy()
    for o in range(1, k):
        prod *= np.roll(X, -o, axis=1)
    return prod


@dataclass(frozen=True)
class TargetFunction:
    """Random polynomial target f(x) = sum_k amp_k scale_k sum_j w_{k,j} W_{k,j}(x),
    where W_{k,j} is the cyclic coordinate-window monomial of length k at j."""

    geometry: Geometry
    amplitudes: tuple[float, ...]
    weights: tuple[np.ndarray, ...]
    scales: tuple[float, ...]
    seed: int

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[0])
        for k, (amp, w, s) in enumerate(
                zip(self.amplitudes, self.weights, self.scales), start=1):
            if amp == 0.0:
                continue
            out += amp * s * (_window_products(X, k) @ w)
        return out

    __call__ = evaluate


def sample_target(profile: SpectralProfile, geometry: Geometry, seed: int,
                  norm_samples: int = 100_000) -> TargetFunction:
    """Draw Gaussian window weights for every degree and normalize each y_k to
    unit second moment, estimated on a fresh uniform sample. Deterministic
    given the seed."""
    if norm_samples < 10_000:
        raise ValueError("norm_samples must be >= 10000")
    w_seq, norm_seq = np.random.SeedSequence(int(seed)).spawn(2)
    rng = np.random.default_rng(w_seq)
    d = geometry.dim
    weights = tuple(rng.standard_normal(d) for _ in range(profile.k_max))
    xnorm = sphere_points(geometry, norm_samples, np.random.default_rng(norm_seq))
    scales = []
    for k, w in enumerate(weights, start=1):
        second = float(np.mean((_window_products(xnorm, k) @ w) ** 2))
        if second < 1e-12:
            raise DegenerateTargetError(
                f"degree {k} component has second moment {second:.3e}"
            )
        scales.append(1.0 / math.sqrt(second))
    amplitudes = tuple(math.sqrt(v) for v in profile.f2)
    return TargetFunction(geometry=geometry, amplitudes=amplitudes,
                          weights=weights, scales=tuple(scales), seed=int(seed))


def ridge_solve(k_train: np.ndarray, y_train: np.ndarray,
                lam: float) -> tuple[np.ndarray, float]:
    """Solve (K + lam I + jitter I) beta = y by Cholesky; returns (beta, jitter).

    Ridgeless solves (lam = 0) climb a diagonal jitter ladder scaled by
    trace(K)/m until the factorization succeeds; the jitter actually used is
    returned so callers can report it.
    """
    if lam < 0:
        raise ValueError("ridge lambda must be >= 0")
    m = k_train.shape[0]
    scale = float(np.trace(k_train)) / m
    multipliers = JITTER_LADDER if lam == 0.0 else (0.0,)
    jitters = tuple(mult * scale for mult in multipliers)
    eye = np.eye(m)
    for jit in jitters:
        a = k_train + (lam + jit) * eye if (lam + jit) != 0.0 else k_train
        try:
            factor = scipy.linalg.cho_factor(a, lower=True)
            beta = scipy.linalg.cho_solve(factor, y_train)
            return beta, jit
        except np.linalg.LinAlgError:
            continue
    raise FactorizationError(
        f"Cholesky failed for every jitter in {jitters}", jitters=jitters
    )


def krr_predict(k_train: np.ndarray, y_train: np.ndarray, lam: float,
                k_cross: np.ndarray) -> np.ndarray:
    """Kernel ridge predictions K(x, X) (K(X, X) + lam I)^{-1} y."""
    beta, _ = ridge_solve(k_train, y_train, lam)
    return k_cross @ beta


@dataclass(frozen=True)
class MseResult:
    """Cross-trial summary of the test error at one training-set size."""

    m: int
    mean: float
    std: float
    trials: int
    jitter_used: float          # largest jitter any trial needed
    per_trial: np.ndarray

    def quantiles(self, q=(0.25, 0.75)) -> tuple[float, ...]:
        """Trial-MSE quantiles, the error-bar alternative to +/- std."""
        return tuple(float(v) for v in np.quantile(self.per_trial, q))


def _mse_trial(profile: SpectralProfile, geometry: Geometry, m: int,
               test_points: int, seed: int, trial: int,
               norm_samples: int) -> tuple[float, float]:
    root = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    s_train, s_target, s_test, s_noise = (int(v) for v in
                                          root.generate_state(4, np.uint64))
    train = sample_sphere(geometry, m, s_train)
    target = sample_target(profile, geometry, s_target, norm_samples=norm_samples)
    test = sample_sphere(geometry, test_points, s_test)
    y = target.evaluate(train.X)
    if profile.noise > 0.0:
        noise_rng = np.random.default_rng(np.random.SeedSequence(s_noise))
        y = y + math.sqrt(profile.noise) * noise_rng.standard_normal(m)
    k_train = build_kernel(train, None, profile)
    k_cross = build_kernel(test, train, profile)
    beta, jitter = ridge_solve(k_train, y, profile.lam)
    pred = k_cross @ beta
    mse = float(np.mean((pred - target.evaluate(test.X)) ** 2))
    return mse, jitter


def empirical_mse(profile: SpectralProfile, geometry: Geometry, m: int,
                  trials: int, test_points: int, seed: int, workers: int = 1,
                  norm_samples: int = 100_000) -> MseResult:
    """Mean and standard deviation of the test MSE over independent trials.

    Every trial draws a fresh training set, a fresh random target, fresh label
    noise, and a fresh test set, all keyed by (seed, trial index) through
    SeedSequence spawning, so results are reproducible and independent of how
    trials are scheduled; the cross-trial reduction order is fixed by index.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if test_points < 1:
        raise ValueError("test_points must be >= 1")

    def run(trial: int) -> tuple[float, float]:
        return _mse_trial(profile, geometry, m, test_points, seed, trial,
                          norm_samples)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]
    mses = np.array([r[0] for r in results])
    jitters = [r[1] for r in results]
    std = float(np.std(mses, ddof=1)) if trials > 1 else 0.0
    return MseResult(m=int(m), mean=float(np.mean(mses)), std=std,
                     trials=int(trials), jitter_used=float(max(jitters)),
                     per_trial=mses)


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues of a degree-r Gram matrix and their MP goodness of fit."""

    eigenvalues: np.ndarray  # ascending
    ratio: float             # m / N_r, the reference-law aspect ratio
    ks: float
    degree: int
    geometry: Geometry


def ks_distance(eigenvalues, mp: MarchenkoPastur) -> float:
    """Two-sided Kolmogorov-Smirnov distance sup_t |F_n(t) - F(t)|.

    Both CDFs are step functions (the reference law has an atom at zero), so
    the supremum is attained at sample points, approached either from the
    right (F_n(t) - F(t)) or from the left (F(t-) - F_n(t-)); F(t-) differs
    from F(t) by the atom exactly at t = 0. The usual (i-1)/n shortcut assumes
    a continuous reference law and would misreport a matched atom as distance.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    n = ev.size
    if n == 0:
        raise ValueError("need at least one eigenvalue")
    cdf = np.atleast_1d(np.asarray(mp_cdf(mp, ev)))
    cdf_left = cdf - np.where(ev == 0.0, mp.point_mass, 0.0)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf_left - (i - 1) / n), 0.0))


def empirical_spectrum(data: Dataset, r: int) -> SpectrumResult:
    """Spectrum of the degree-r Gram matrix, which equals Y_r(X) Y_r(X)^T / N_r
    by the addition theorem, scored against mu_{m/N_r}.

    The Gram has rank at most N_r; eigensolver noise around the exact zeros is
    snapped to 0 so the KS statistic sees the reference law's atom.
    """
    m = data.m
    if m < 2:
        raise ValueError("need at least 2 samples")
    gram = legendre_gram(data, None, r)
    evals = np.linalg.eigvalsh(gram)
    scale = max(1.0, float(evals[-1]))
    evals = np.where(np.abs(evals) <= 1e-10 * scale, 0.0, evals)
    n_r = harmonic_dim(data.geometry, r)
    ratio = m / n_r
    ks = ks_distance(evals, MarchenkoPastur(ratio))
    return SpectrumResult(eigenvalues=evals, ratio=float(ratio), ks=ks,
                          degree=int(r), geometry=data.geometry)
