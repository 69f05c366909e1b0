import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from entdecay.errors import DomainError, InvalidStateError
from entdecay.qstate import (
    DensityMatrix, PureState, SeedSpec, c0_from_srd, projectors, sample_bures_mixed,
    sample_haar_pure, sample_hs_mixed, srd_arrays, srd_invariants, validate_density_matrices,
)


def purities(rho):
    return np.einsum("nij,nji->n", rho, rho).real


def test_seed_determinism_and_streams():
    a = sample_haar_pure(SeedSpec(5, 0), 10)
    assert np.array_equal(a, sample_haar_pure(SeedSpec(5, 0), 10))
    assert not np.allclose(a, sample_haar_pure(SeedSpec(5, 1), 10))
    assert not np.allclose(a, sample_haar_pure(SeedSpec(6, 0), 10))
    for bad in (-1, 2 ** 64):
        with pytest.raises(DomainError):
            SeedSpec(bad, 0)


def test_haar_moments():
    psi = sample_haar_pure(SeedSpec(1, 0), 200_000)
    assert np.allclose(np.linalg.norm(psi, axis=1), 1.0, atol=1e-12)
    # E|psi_i|^2 = 1/4 and E|psi_i|^4 = 1/10 for Haar vectors in C^4
    p = np.abs(psi) ** 2
    assert np.allclose(p.mean(axis=0), 0.25, atol=3e-3)
    assert np.allclose((p ** 2).mean(axis=0), 0.1, atol=2e-3)
    c = 2 * np.abs(psi[:, 0] * psi[:, 3] - psi[:, 1] * psi[:, 2])
    assert abs(c.mean() - 3 * math.pi / 16) < 3e-3


def test_hs_states_valid_and_purity():
    rho = sample_hs_mixed(SeedSpec(2, 0), 100_000)
    validate_density_matrices(rho[:2000])
    # E tr rho^2 = (N + K) / (N K + 1) with N = K = 4
    assert abs(purities(rho).mean() - 8 / 17) < 2e-3


def test_bures_states_valid_and_purity():
    rho = sample_bures_mixed(SeedSpec(3, 0), 100_000)
    validate_density_matrices(rho[:2000])
    # E tr rho^2 = (5 N^2 + 1) / (2 N (N^2 + 2)) for the Bures measure
    assert abs(purities(rho).mean() - 81 / 144) < 2e-3


def test_samplers_reject_empty():
    for f in (sample_haar_pure, sample_hs_mixed, sample_bures_mixed):
        with pytest.raises(DomainError):
            f(SeedSpec(0, 0), 0)


def test_pure_state_validation():
    with pytest.raises(InvalidStateError):
        PureState([1, 1, 0, 0])
    with pytest.raises(InvalidStateError):
        PureState([1, 0, 0])
    with pytest.raises(InvalidStateError):
        PureState([np.nan, 0, 0, 0])
    psi = PureState.from_unnormalized([1, 0, 0, 1])
    assert np.allclose(psi.amplitudes, [2 ** -0.5, 0, 0, 2 ** -0.5])
    assert math.isclose(psi.density_matrix().purity(), 1.0)


def test_density_matrix_validation():
    DensityMatrix(np.eye(4) / 4)
    bad = [np.eye(4) / 2, np.diag([1.5, -0.5, 0, 0]), np.triu(np.ones((4, 4))) / 4]
    for m in bad:
        with pytest.raises(InvalidStateError):
            DensityMatrix(m)
    with pytest.raises(InvalidStateError):
        validate_density_matrices(np.eye(4))


def test_projectors():
    psi = sample_haar_pure(SeedSpec(4, 0), 5)
    p = projectors(psi)
    assert np.allclose(p @ p, p)
    assert np.allclose(np.trace(p, axis1=1, axis2=2), 1)


@given(st.integers(min_value=0, max_value=2 ** 32))
@settings(max_examples=50, deadline=None)
def test_srd_reconstructs_c0(seed):
    psi = sample_haar_pure(SeedSpec(seed, 0), 1)[0]
    inv = srd_invariants(psi)
    assert 0 <= inv.r <= inv.s <= 0.5 + 1e-15
    assert 0 <= inv.theta < 2 * math.pi
    assert math.isclose(float(c0_from_srd(inv.s, inv.r, inv.theta)), inv.c0, abs_tol=1e-12)
    assert math.isclose(inv.d ** 2, 4 * (inv.s ** 2 - inv.r ** 2), abs_tol=1e-12)


def test_srd_arrays_batch():
    psi = sample_haar_pure(SeedSpec(9, 0), 100)
    s, r, d, theta, c0 = srd_arrays(psi)
    assert np.allclose(c0_from_srd(s, r, theta), c0, atol=1e-12)
