import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from entdecay.errors import AccuracyError, DomainError, InvalidStateError
from entdecay.smallmat import (
    SIGMA_X, SIGMA_Y, SIGMA_Z, adaptive_quad, agm, elliptic_k, hermitian_eig, kron, psd_sqrt,
)


def random_hermitian(rng, n=4):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return a + a.conj().T


def charpoly_roots(h):
    # Faddeev-LeVerrier coefficients, then polynomial roots
    n = h.shape[0]
    m = np.zeros_like(h)
    coeffs = [1.0 + 0j]
    for k in range(1, n + 1):
        m = h @ m + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(h @ m) / k)
    return np.sort(np.roots(coeffs).real)[::-1]


def test_kron_order():
    assert np.allclose(kron(SIGMA_X, SIGMA_Z), np.kron(SIGMA_X, SIGMA_Z))
    with pytest.raises(DomainError):
        kron(np.eye(3), SIGMA_X)
    with pytest.raises(DomainError):
        kron(np.full((2, 2), np.nan), SIGMA_X)


@pytest.mark.parametrize("seed", range(20))
def test_eig_matches_characteristic_polynomial(seed):
    h = random_hermitian(np.random.default_rng(seed))
    res = hermitian_eig(h)
    assert np.allclose(res.eigenvalues, charpoly_roots(h), atol=1e-9)
    assert np.all(np.diff(res.eigenvalues) <= 0)
    v = res.eigenvectors
    assert np.allclose(v.conj().T @ v, np.eye(4), atol=1e-12)
    assert np.allclose(res.reconstruct(), h, atol=1e-12)


def test_eig_degenerate():
    h = np.diag([1.0, 1.0, 2.0, 2.0]).astype(complex)
    u = np.linalg.qr(random_hermitian(np.random.default_rng(3)))[0]
    res = hermitian_eig(u @ h @ u.conj().T)
    assert np.allclose(res.eigenvalues, [2, 2, 1, 1], atol=1e-12)


def test_eig_rejects_bad_input():
    with pytest.raises(DomainError):
        hermitian_eig(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(DomainError):
        hermitian_eig(np.zeros((2, 3)))


def test_psd_sqrt():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    p = a @ a.conj().T
    r = psd_sqrt(p)
    assert np.allclose(r @ r, p, atol=1e-10)
    assert np.allclose(r, r.conj().T)
    with pytest.raises(InvalidStateError):
        psd_sqrt(-np.eye(4))


def test_agm_known_value():
    # Gauss's constant: agm(1, sqrt 2)
    assert math.isclose(agm(1.0, math.sqrt(2.0)), 1.19814023473559220744, rel_tol=1e-15)


@pytest.mark.parametrize("m", [-3.0, -0.5, 0.0, 0.1, 0.5, 0.9, 0.999, 0.9999])
def test_elliptic_k_against_quadrature(m):
    ref, _ = integrate.quad(lambda t: 1.0 / math.sqrt(1.0 - m * math.sin(t) ** 2), 0, math.pi / 2,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    assert math.isclose(elliptic_k(m), ref, rel_tol=1e-12)
    assert math.isclose(elliptic_k(m), special.ellipk(m), rel_tol=1e-13)


@pytest.mark.parametrize("eps", [1e-6, 1e-9, 1e-12])
def test_elliptic_k_near_one(eps):
    m = 1 - eps
    assert math.isclose(elliptic_k(m), special.ellipk(m), rel_tol=1e-13)
    assert math.isclose(elliptic_k(m), float(mpmath.ellipk(mpmath.mpf(m))), rel_tol=1e-13)


def test_elliptic_k_vector_and_domain():
    m = np.linspace(-1, 0.99, 7)
    assert np.allclose(elliptic_k(m), special.ellipk(m), rtol=1e-13)
    for bad in (1.0, 1.5, float("nan")):
        with pytest.raises(DomainError):
            elliptic_k(bad)


@given(st.floats(min_value=-50.0, max_value=0.999999))
@settings(max_examples=60, deadline=None)
def test_elliptic_k_property(m):
    assert math.isclose(elliptic_k(m), special.ellipk(m), rel_tol=1e-12)


def test_quad_smooth_and_singular():
    assert math.isclose(adaptive_quad(np.sin, 0.0, math.pi), 2.0, rel_tol=1e-12)
    assert math.isclose(adaptive_quad(lambda x: 1 / np.sqrt(x), 0.0, 1.0, singular="left"),
                        2.0, rel_tol=1e-9)
    assert math.isclose(adaptive_quad(lambda x: np.log(1 - x), 0.0, 1.0, singular="right"),
                        -1.0, rel_tol=1e-9)
    val = adaptive_quad(lambda x: 1 / np.sqrt(x * (1 - x)), 0.0, 1.0, singular="both")
    assert math.isclose(val, math.pi, rel_tol=1e-9)


def test_quad_scalar_callable():
    val = adaptive_quad(lambda x: math.exp(-x), 0.0, 5.0, vectorized=False)
    assert math.isclose(val, 1 - math.exp(-5.0), rel_tol=1e-12)


def test_quad_reports_failure():
    with pytest.raises(AccuracyError) as info:
        adaptive_quad(lambda x: np.sin(1.0 / x), 1e-6, 1.0, tol=1e-14, max_subdivisions=5)
    assert math.isfinite(info.value.estimate)
    assert info.value.error > 0
