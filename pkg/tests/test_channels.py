import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_apply, kraus4
from entdecay.channels import (
    BothQubits, ChannelKind, FirstOnly, SideSpec, apply_local, check_q, make_kraus, verify_cptp,
)
from entdecay.errors import DomainError
from entdecay.qstate import SeedSpec, sample_hs_mixed

KINDS = ["D", "AD", "PD"]
QS = np.linspace(0.0, 1.0, 21)


def purity(rho):
    return float(np.real(np.trace(rho @ rho)))


@pytest.mark.parametrize("kind", KINDS)
def test_completeness_sweep(kind):
    for q in QS:
        rep = verify_cptp(make_kraus(kind, q), n_states=50)
        assert rep.ok, (kind, q, rep)
        assert rep.completeness_dev <= 1e-12


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("side", ["both", "first"])
def test_apply_matches_bruteforce(kind, side, hs_states):
    for q in (0.0, 0.13, 0.5, 0.87, 1.0):
        out = apply_local(hs_states[:40], kind, q, side)
        ref = np.array([brute_apply(r, kind, q, side) for r in hs_states[:40]])
        assert np.allclose(out, ref, atol=1e-13)


def test_single_state_shape(hs_states):
    out = apply_local(hs_states[0], "AD", 0.3)
    assert out.shape == (4, 4)


def test_bruteforce_kraus_complete():
    for kind in KINDS:
        for side in ("both", "first"):
            ks = kraus4(kind, 0.37, side)
            assert np.allclose(sum(k.conj().T @ k for k in ks), np.eye(4), atol=1e-14)


@pytest.mark.parametrize("kind", KINDS)
def test_semigroup_composition(kind, hs_states):
    q1, q2 = 0.3, 0.45
    twice = apply_local(apply_local(hs_states[:20], kind, q1), kind, q2)
    once = apply_local(hs_states[:20], kind, 1 - (1 - q1) * (1 - q2))
    assert np.allclose(twice, once, atol=1e-13)


def test_limits(hs_states):
    rho = hs_states[:10]
    assert np.allclose(apply_local(rho, "PD", 0.0), rho)
    assert np.allclose(apply_local(rho, "D", 1.0), np.eye(4) / 4)
    ground = np.zeros((4, 4))
    ground[0, 0] = 1
    assert np.allclose(apply_local(rho, "AD", 1.0), ground)


@pytest.mark.parametrize("kind", ["D", "PD"])
def test_unital_channels_do_not_raise_purity(kind, hs_states):
    for q in QS:
        out = apply_local(hs_states, kind, q)
        p0 = np.einsum("nij,nji->n", hs_states, hs_states).real
        p1 = np.einsum("nij,nji->n", out, out).real
        assert np.all(p1 <= p0 + 1e-12)


def test_amplitude_damping_can_purify():
    # non-unital: the maximally mixed state is driven to |00>
    rho = np.eye(4) / 4
    assert purity(apply_local(rho, "AD", 1.0)) > purity(rho)
    # pure inputs cannot gain purity
    psi = np.array([0.6, 0.0, 0.0, 0.8])
    assert purity(apply_local(np.outer(psi, psi), "AD", 0.4)) <= 1 + 1e-12


@given(st.floats(0.0, 1.0), st.sampled_from(KINDS), st.sampled_from(["both", "first"]),
       st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_output_is_a_state(q, kind, side, seed):
    rho = sample_hs_mixed(SeedSpec(seed, 0), 3)
    out = apply_local(rho, kind, q, side, check=True)
    assert np.allclose(np.trace(out, axis1=1, axis2=2), 1.0, atol=1e-12)


def test_parsing_and_domain():
    assert ChannelKind.parse("amplitude-damping") == ChannelKind.AD
    assert ChannelKind.parse(2) == ChannelKind.PD
    assert SideSpec.parse("first") == FirstOnly
    assert SideSpec.parse("both") == BothQubits
    for bad in ("XX", "foo"):
        with pytest.raises(DomainError):
            ChannelKind.parse(bad)
    with pytest.raises(DomainError):
        SideSpec.parse("third")
    for q in (-0.1, 1.1, np.nan):
        with pytest.raises(DomainError):
            check_q(q)
        with pytest.raises(DomainError):
            make_kraus("D", q)
