import numpy as np
import pytest

from entdecay.qstate import SeedSpec, sample_haar_pure, sample_hs_mixed
from entdecay.smallmat import SPIN_FLIP


def wootters_oracle(rho):
    """Concurrence from the eigenvalues of rho rho~ (independent of the package route)."""
    rho = np.asarray(rho, dtype=complex)
    tilde = SPIN_FLIP @ rho.conj() @ SPIN_FLIP
    ev = np.linalg.eigvals(rho @ tilde)
    lam = np.sort(np.sqrt(np.clip(ev.real, 0.0, None)))[::-1]
    return max(0.0, lam[0] - lam[1] - lam[2] - lam[3])


def kraus4(kind, q, side="both"):
    """Two-qubit Kraus operators built with np.kron from textbook single-qubit sets."""
    i2 = np.eye(2)
    if kind == "D":
        paulis = [i2, np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]),
                  np.array([[1, 0], [0, -1]])]
        ops = [np.sqrt(1 - 0.75 * q) * paulis[0]] + [np.sqrt(q / 4) * p for p in paulis[1:]]
    elif kind == "AD":
        ops = [np.array([[1, 0], [0, np.sqrt(1 - q)]]), np.array([[0, np.sqrt(q)], [0, 0]])]
    else:
        ops = [np.sqrt(1 - q) * i2, np.sqrt(q) * np.diag([1.0, 0.0]),
               np.sqrt(q) * np.diag([0.0, 1.0])]
    if side == "first":
        return [np.kron(a, i2) for a in ops]
    return [np.kron(a, b) for a in ops for b in ops]


def brute_apply(rho, kind, q, side="both"):
    return sum(k @ rho @ k.conj().T for k in kraus4(kind, q, side))


@pytest.fixture(scope="session")
def haar_states():
    return sample_haar_pure(SeedSpec(11, 0), 400)


@pytest.fixture(scope="session")
def hs_states():
    return sample_hs_mixed(SeedSpec(12, 0), 200)


def pd_state_with_qs(q_s):
    """Real state (a, b, b, -a) whose phase-damping separation strength is ``q_s``.

    For this family C0 = 1 and d = 4ab; the PD threshold
    1 - d / (sqrt(C0^2 + d^2) + C0) equals q_s when d = tan(2 arctan(1 - q_s)).
    """
    d = np.tan(2.0 * np.arctan(1.0 - q_s))
    if d > 1.0:
        raise ValueError("this family reaches q_s >= 1 - tan(pi / 8) only")
    prod = d / 4.0
    hi, lo = np.sqrt(0.5 + 2 * prod), np.sqrt(max(0.5 - 2 * prod, 0.0))
    a, b = 0.5 * (hi + lo), 0.5 * (hi - lo)
    return np.array([a, b, b, -a])
