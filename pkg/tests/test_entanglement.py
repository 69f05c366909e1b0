import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from conftest import brute_apply, wootters_oracle
from entdecay import kernels
from entdecay.channels import ChannelKind, SideSpec, apply_local
from entdecay.entanglement import (
    D_LIMIT, AsymptoticOnly, EsdKind, EsdOutcome, FiniteTime, InitiallySeparable,
    concurrence_evolved, concurrence_mixed, concurrence_pure, concurrence_single,
    esd_analytic_arrays, esd_numeric_arrays, esd_time_analytic, esd_time_numeric,
    max_concurrence,
)
from entdecay.errors import DomainError, InvalidStateError
from entdecay.qstate import SeedSpec, projectors, sample_haar_pure

KINDS = ["D", "AD", "PD"]
BELL = np.array([1, 0, 0, 1]) / math.sqrt(2)


def oracle_gap(psi, kind, q, side="both"):
    """Unclipped lambda1 - lambda2 - lambda3 - lambda4 of the evolved state."""
    from entdecay.smallmat import SPIN_FLIP
    rho = brute_apply(np.outer(psi, psi.conj()), kind, q, side)
    ev = np.linalg.eigvals(rho @ SPIN_FLIP @ rho.conj() @ SPIN_FLIP)
    lam = np.sort(np.sqrt(np.clip(ev.real, 0, None)))[::-1]
    return lam[0] - lam[1:].sum()


def test_concurrence_mixed_vs_oracle(hs_states):
    ours = concurrence_mixed(hs_states)
    ref = np.array([wootters_oracle(r) for r in hs_states])
    assert np.allclose(ours, ref, atol=1e-9)


def test_concurrence_pure_forms(haar_states):
    c = concurrence_pure(haar_states)
    ref = 2 * np.abs(haar_states[:, 0] * haar_states[:, 3] - haar_states[:, 1] * haar_states[:, 2])
    assert np.allclose(c, ref, atol=1e-14)
    assert np.allclose(concurrence_mixed(projectors(haar_states[:50])), c[:50], atol=1e-12)
    assert math.isclose(concurrence_pure(BELL), 1.0)
    assert concurrence_pure(np.array([1, 0, 0, 0])) == 0.0


def test_concurrence_mixed_validates():
    with pytest.raises(InvalidStateError):
        concurrence_mixed(np.eye(4))
    assert concurrence_mixed(np.eye(4) / 4) == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_closed_form_vs_kraus_oracle(kind, haar_states):
    qs = np.linspace(0, 1, 9)
    closed = concurrence_evolved(kind, qs, haar_states[:60])
    for i, psi in enumerate(haar_states[:60]):
        for j, q in enumerate(qs):
            rho = brute_apply(np.outer(psi, psi.conj()), kind, q)
            assert abs(closed[i, j] - wootters_oracle(rho)) < 1e-7


def test_concurrence_evolved_shapes(haar_states):
    assert isinstance(concurrence_evolved("D", 0.2, BELL), float)
    assert concurrence_evolved("D", [0.1, 0.2], BELL).shape == (2,)
    assert concurrence_evolved("D", 0.1, haar_states[:5]).shape == (5,)
    assert concurrence_evolved("D", [0.1, 0.2, 0.3], haar_states[:5]).shape == (5, 3)
    with pytest.raises(DomainError):
        concurrence_evolved("D", 1.2, BELL)


@pytest.mark.parametrize("kind", KINDS)
def test_esd_analytic_vs_independent_root(kind, haar_states):
    for psi in haar_states[:40]:
        out = esd_time_analytic(kind, psi)
        if out.kind != EsdKind.FINITE or out.q_s > 1 - 1e-6:
            continue
        root = brentq(lambda q: oracle_gap(psi, kind, q), 0.0, min(out.q_s + 0.05, 1.0) if
                      oracle_gap(psi, kind, min(out.q_s + 0.05, 1.0)) < 0 else 1.0, xtol=1e-13)
        assert abs(root - out.q_s) < 1e-6


@pytest.mark.parametrize("kind", KINDS)
def test_esd_analytic_vs_numeric(kind, haar_states):
    codes_a, qa = esd_analytic_arrays(kind, haar_states)
    codes_n, qn = esd_numeric_arrays(projectors(haar_states), kind)
    assert np.array_equal(codes_a, codes_n)
    fin = codes_a == kernels.FINITE
    assert np.max(np.abs(qa[fin] - qn[fin])) < 1e-8


def test_bell_thresholds():
    assert math.isclose(esd_time_analytic("D", BELL).q_s, D_LIMIT, rel_tol=1e-12)
    assert esd_time_analytic("PD", BELL).kind == EsdKind.ASYMPTOTIC


def test_classification_boundaries():
    # PD: d = 0 (one product vanishes) separates only asymptotically
    psi = np.array([0.6, 0.0, 0.0, 0.8])
    assert esd_time_analytic("PD", psi).kind == EsdKind.ASYMPTOTIC
    # AD: finite iff C0 <= 2 |psi11|^2
    a = np.array([math.sqrt(0.7), 0, 0, math.sqrt(0.3)])  # C0 = 0.917 > 0.6
    b = np.array([math.sqrt(0.3), 0, 0, math.sqrt(0.7)])  # C0 = 0.917 < 1.4
    assert esd_time_analytic("AD", a).kind == EsdKind.ASYMPTOTIC
    assert esd_time_analytic("AD", b).kind == EsdKind.FINITE
    assert esd_time_analytic("D", np.array([1, 0, 0, 0])).kind == EsdKind.SEPARABLE


def test_numeric_codes():
    codes, _ = esd_numeric_arrays(np.eye(4)[None] / 4, "D")
    assert codes[0] == kernels.SEPARABLE
    out = esd_time_numeric(np.outer(BELL, BELL), "D")
    assert abs(out.q_s - D_LIMIT) < 1e-8
    out = esd_time_numeric(np.outer(BELL, BELL), "PD")
    assert out.kind == EsdKind.ASYMPTOTIC
    with pytest.raises(DomainError):
        esd_numeric_arrays(np.eye(4)[None] / 4, "D", tol=0.0)


def test_single_channel(haar_states):
    c0 = concurrence_pure(haar_states)
    assert np.all(concurrence_single("D", 2 / 3, c0) == 0.0)
    assert np.all(concurrence_single("D", 0.66, c0) > 0)
    for kind in ("AD", "PD"):
        assert np.all(concurrence_single(kind, 0.999, c0) > 0)
    # agrees with the Kraus route on the first qubit only
    for kind in KINDS:
        for psi in haar_states[:20]:
            rho = apply_local(np.outer(psi, psi.conj()), kind, 0.4, SideSpec.FIRST)
            assert abs(concurrence_single(kind, 0.4, concurrence_pure(psi)) -
                       concurrence_mixed(rho)) < 1e-10
    with pytest.raises(DomainError):
        concurrence_single("D", 0.5, 1.5)


def test_max_concurrence():
    q = np.linspace(0, 1, 11)
    assert np.allclose(max_concurrence("D", q), np.maximum(1 - 1.5 * q * (2 - q), 0))
    assert np.allclose(max_concurrence("AD", q), 1 - q)
    assert np.allclose(max_concurrence("PD", q), (1 - q) ** 2)
    assert math.isclose(max_concurrence("D", 0.5, SideSpec.FIRST), 0.25)


def test_outcome_validation():
    assert FiniteTime(0.3).q_s == 0.3
    assert AsymptoticOnly().kind == EsdKind.ASYMPTOTIC
    assert InitiallySeparable().kind == EsdKind.SEPARABLE
    for bad in (0.0, 1.5, float("nan")):
        with pytest.raises(DomainError):
            FiniteTime(bad)


@given(st.integers(0, 2 ** 31), st.sampled_from(KINDS))
@settings(max_examples=40, deadline=None)
def test_concurrence_monotone_in_q(seed, kind):
    psi = sample_haar_pure(SeedSpec(seed, 0), 1)[0]
    c = concurrence_evolved(kind, np.linspace(0, 1, 41), psi)
    assert np.all(np.diff(c) <= 1e-12)
    assert c[0] <= 1 and math.isclose(c[0], concurrence_pure(psi), abs_tol=1e-12)
