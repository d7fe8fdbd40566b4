import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherelc.harmonics import (
    Dataset,
    Geometry,
    GeometryError,
    harmonic_dim,
    legendre,
    legendre_gram,
    legendre_series,
    sample_sphere,
)
from spherelc.rmt import adaptive_simpson

FULL24 = Geometry.full(24)


# ---------------------------------------------------------------------------
# harmonic_dim
# ---------------------------------------------------------------------------

def _monomials(d, k):
    """All exponent multi-indices of total degree k in d variables."""
    if d == 1:
        return [(k,)]
    out = []
    for first in range(k + 1):
        out.extend((first,) + rest for rest in _monomials(d - 1, k - first))
    return out


def _harmonic_dim_bruteforce(d, k):
    """dim of degree-k harmonic polynomials = #monomials - rank(Laplacian)."""
    dom = _monomials(d, k)
    img = _monomials(d, k - 2) if k >= 2 else []
    if not img:
        return len(dom)
    lap = np.zeros((len(img), len(dom)))
    index = {mono: i for i, mono in enumerate(img)}
    for j, mono in enumerate(dom):
        for axis in range(d):
            e = mono[axis]
            if e >= 2:
                lower = list(mono)
                lower[axis] -= 2
                lap[index[tuple(lower)], j] += e * (e - 1)
    return len(dom) - np.linalg.matrix_rank(lap)


@pytest.mark.parametrize("d", [2, 3, 5, 24])
def test_degree_one_count_is_d(d):
    assert harmonic_dim(Geometry.full(d), 1) == d


def test_three_dims_degree_two():
    # classical 2k+1 count in three dimensions
    assert harmonic_dim(Geometry.full(3), 2) == 5


@pytest.mark.parametrize("d,k", list(itertools.product([2, 3, 4, 5], [1, 2, 3, 4])))
def test_count_matches_laplacian_kernel(d, k):
    assert harmonic_dim(Geometry.full(d), k) == _harmonic_dim_bruteforce(d, k)


def test_d24_k3_value():
    # C(26, 3) - C(24, 1) = 2600 - 24
    assert harmonic_dim(FULL24, 3) == 2576


@pytest.mark.parametrize("d,k", [(24, 7), (60, 5), (14, 6)])
def test_count_matches_factorial_identity(d, k):
    # independent closed form: (2k + d - 2) (k + d - 3)! / (k! (d - 2)!)
    expect = (2 * k + d - 2) * math.factorial(k + d - 3) \
        // (math.factorial(k) * math.factorial(d - 2))
    got = harmonic_dim(Geometry.full(d), k)
    assert got == expect
    assert isinstance(got, int)


def test_patched_count_scales_with_patches():
    assert harmonic_dim(Geometry.patched(20, 6), 1) == 120
    assert harmonic_dim(Geometry.patched(14, 6), 2) == 6 * harmonic_dim(Geometry.full(14), 2)


def test_degree_zero_rejected():
    with pytest.raises(ValueError):
        harmonic_dim(FULL24, 0)


# ---------------------------------------------------------------------------
# geometry / dataset
# ---------------------------------------------------------------------------

def test_geometry_validation():
    with pytest.raises(ValueError):
        Geometry.full(1)
    with pytest.raises(ValueError):
        Geometry.patched(1, 3)
    with pytest.raises(ValueError):
        Geometry.patched(4, 0)
    with pytest.raises(ValueError):
        Geometry(kind="weird", d0=4)
    assert Geometry.patched(4, 3).dim == 12


# ---------------------------------------------------------------------------
# legendre
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 5, 24])
@pytest.mark.parametrize("k", [0, 1, 2, 5, 7])
def test_normalized_at_one(d, k):
    assert legendre(d, k, 1.0) == pytest.approx(1.0, abs=1e-13)


def test_degree_one_is_identity():
    t = np.linspace(-1, 1, 11)
    assert np.allclose(legendre(24, 1, t), t)


def test_three_dims_classical_values():
    assert legendre(3, 2, 0.5) == pytest.approx(-0.125, abs=1e-15)
    t = np.linspace(-1, 1, 201)
    assert np.allclose(legendre(3, 2, t), (3 * t**2 - 1) / 2, atol=1e-14)
    assert np.allclose(legendre(3, 3, t), (5 * t**3 - 3 * t) / 2, atol=1e-14)


def test_two_dims_is_chebyshev():
    theta = np.linspace(0, np.pi, 50)
    for k in range(6):
        assert np.allclose(legendre(2, k, np.cos(theta)), np.cos(k * theta), atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 8, 24])
def test_bounded_by_one_on_dense_grid(d):
    t = np.linspace(-1, 1, 2001)
    for k in range(8):
        assert np.max(np.abs(legendre(d, k, t))) <= 1 + 1e-12


def test_argument_errors():
    with pytest.raises(ValueError):
        legendre(24, -1, 0.5)
    with pytest.raises(ValueError):
        legendre(1, 2, 0.5)


def test_out_of_range_inputs_are_clamped():
    assert legendre(8, 3, 1.0 + 1e-15) == pytest.approx(1.0)
    assert legendre(8, 2, -1.0 - 1e-15) == pytest.approx(legendre(8, 2, -1.0))


@pytest.mark.parametrize("d", [3, 5, 8])
def test_quadrature_orthogonality(d):
    # int P_j P_k (1-t^2)^{(d-3)/2} dt / int (1-t^2)^{(d-3)/2} dt = delta_jk / N(d, k),
    # evaluated as smooth integrals over t = cos(theta)
    def moment(j, k):
        f = lambda th: (legendre(d, j, math.cos(th)) * legendre(d, k, math.cos(th))
                        * math.sin(th) ** (d - 2))
        w = lambda th: math.sin(th) ** (d - 2)
        return adaptive_simpson(f, 0.0, math.pi, tol=1e-12) / \
            adaptive_simpson(w, 0.0, math.pi, tol=1e-12)

    for j in range(1, 5):
        for k in range(j, 5):
            expect = 1.0 / harmonic_dim(Geometry.full(d), k) if j == k else 0.0
            assert moment(j, k) == pytest.approx(expect, abs=1e-9)


def test_series_matches_explicit_sum():
    coeffs = [0.7, 0.0, 0.2, 0.05]
    t = np.linspace(-1, 1, 57)
    expect = sum(c * legendre(9, k, t) for k, c in enumerate(coeffs, start=1))
    assert np.allclose(legendre_series(9, coeffs, t), expect, atol=1e-14)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def test_sample_norms_full():
    ds = sample_sphere(Geometry.full(8), 5, 7)
    assert ds.X.shape == (5, 8)
    assert np.allclose(np.linalg.norm(ds.X, axis=1), 1.0, atol=1e-12)


def test_sample_norms_patched():
    ds = sample_sphere(Geometry.patched(4, 3), 2, 1)
    assert ds.X.shape == (2, 12)
    blocks = ds.X.reshape(2, 3, 4)
    assert np.allclose(np.linalg.norm(blocks, axis=2), 1.0, atol=1e-12)


def test_sampling_is_deterministic():
    a = sample_sphere(FULL24, 10, 123)
    b = sample_sphere(FULL24, 10, 123)
    assert np.array_equal(a.X, b.X)
    c = sample_sphere(FULL24, 10, 124)
    assert not np.array_equal(a.X, c.X)


def test_zero_samples_rejected():
    with pytest.raises(ValueError):
        sample_sphere(FULL24, 0, 1)


# ---------------------------------------------------------------------------
# legendre_gram
# ---------------------------------------------------------------------------

def test_self_gram_diagonal_is_one():
    for geom in (Geometry.full(8), Geometry.patched(5, 3)):
        ds = sample_sphere(geom, 7, 3)
        for k in (1, 2, 3):
            g = legendre_gram(ds, None, k)
            assert np.allclose(np.diag(g), 1.0, atol=1e-12)


def test_single_point_gram():
    ds = sample_sphere(Geometry.full(6), 1, 0)
    assert legendre_gram(ds, None, 4) == pytest.approx(np.array([[1.0]]))


def test_self_gram_symmetry():
    ds = sample_sphere(Geometry.full(10), 25, 5)
    g = legendre_gram(ds, None, 3)
    assert np.max(np.abs(g - g.T)) < 1e-14


def test_cross_gram_shape_and_consistency():
    a = sample_sphere(Geometry.full(6), 8, 0)
    b = sample_sphere(Geometry.full(6), 5, 1)
    g = legendre_gram(a, b, 2)
    assert g.shape == (8, 5)
    # entry oracle: evaluate the polynomial on one dot product directly
    dot = float(a.X[2] @ b.X[3])
    assert g[2, 3] == pytest.approx(float(legendre(6, 2, dot)), abs=1e-13)


def test_geometry_mismatch_rejected():
    a = sample_sphere(Geometry.full(6), 4, 0)
    b = sample_sphere(Geometry.full(7), 4, 0)
    with pytest.raises(GeometryError):
        legendre_gram(a, b, 1)


def test_patched_gram_is_patch_average():
    geom = Geometry.patched(5, 3)
    ds = sample_sphere(geom, 6, 9)
    g = legendre_gram(ds, None, 2)
    expect = np.zeros((6, 6))
    for a in range(3):
        block = ds.X[:, 5 * a:5 * (a + 1)]
        expect += np.asarray(legendre(5, 2, np.clip(block @ block.T, -1, 1)))
    expect /= 3
    assert np.allclose(g, expect, atol=1e-14)


def test_scaled_self_gram_is_psd_with_bounded_rank():
    # N(d,k) * Gram = Y_k Y_k^T must be PSD with rank <= min(m, N(d,k))
    geom = Geometry.full(5)
    ds = sample_sphere(geom, 12, 4)
    for k in (1, 2):
        n_k = harmonic_dim(geom, k)
        g = n_k * legendre_gram(ds, None, k)
        evals = np.linalg.eigvalsh(g)
        scale = max(evals.max(), 1.0)
        assert evals.min() >= -1e-8 * scale
        assert int(np.sum(evals > 1e-8 * scale)) <= min(12, n_k)


def test_rank_is_exactly_harmonic_dim_when_oversampled():
    geom = Geometry.full(6)
    ds = sample_sphere(geom, 20, 11)
    evals = np.linalg.eigvalsh(legendre_gram(ds, None, 1))
    big = np.sum(evals > 1e-8 * evals.max())
    assert big == 6


def test_monte_carlo_orthogonality():
    # E[P_j(e.x) P_k(e.x)] = delta_jk / N(d,k); the j=k=1 case pins the
    # normalization of the linear harmonics to sqrt(d) x
    d = 8
    geom = Geometry.full(d)
    rngspheres = sample_sphere(geom, 40_000, 2024)
    e = np.zeros(d)
    e[0] = 1.0
    t = rngspheres.X @ e
    vals = {k: np.asarray(legendre(d, k, t)) for k in (1, 2, 3)}
    for j in (1, 2, 3):
        for k in (j, 3):
            prod = vals[j] * vals[k]
            mean = prod.mean()
            sem = prod.std(ddof=1) / math.sqrt(prod.size)
            expect = 1.0 / harmonic_dim(geom, k) if j == k else 0.0
            assert abs(mean - expect) <= 3 * sem + 1e-12


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(d=st.integers(2, 40), k=st.integers(0, 7),
       t=st.floats(-1.0, 1.0, allow_nan=False))
def test_legendre_bounded_property(d, k, t):
    assert abs(legendre(d, k, t)) <= 1 + 1e-10


@settings(max_examples=25, deadline=None)
@given(d=st.integers(2, 30), k=st.integers(1, 7))
def test_dimension_count_positive_and_increasing_in_d(d, k):
    n = harmonic_dim(Geometry.full(d), k)
    assert n >= 1
    assert harmonic_dim(Geometry.full(d + 1), k) >= n
