"""Kraus sets for the depolarizing, amplitude-damping and phase-damping channels.

The same single-qubit channel acts on both qubits (``BothQubits``) or on
the first one only (``FirstOnly``). Two-qubit application is done as two
sequential single-qubit Kraus sums followed by Hermitisation.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from . import kernels
from .qstate import SeedSpec, sample_hs_mixed, validate_density_matrices, InvalidStateError


class ChannelKind(enum.IntEnum):
    D = 0
    AD = 1
    PD = 2

    @classmethod
    def parse(cls, value):
        """Accept a member, its code, or a name such as ``"AD"`` or ``"depolarizing"``."""
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().upper().replace("-", "").replace("_", "")
        aliases = {"D": cls.D, "DEPOLARIZING": cls.D,
                   "AD": cls.AD, "AMPLITUDEDAMPING": cls.AD,
                   "PD": cls.PD, "PHASEDAMPING": cls.PD}
        if key not in aliases:
            raise DomainError(f"unknown channel kind {value!r}")
        return aliases[key]


class SideSpec(enum.IntEnum):
    BOTH = 0
    FIRST = 1

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().lower()
        if key in ("both", "bothqubits", "2"):
            return cls.BOTH
        if key in ("first", "firstonly", "single", "1"):
            return cls.FIRST
        raise DomainError(f"unknown side {value!r}")


BothQubits = SideSpec.BOTH
FirstOnly = SideSpec.FIRST


def check_q(q):
    qa = np.asarray(q, dtype=float)
    if not np.all((qa >= 0.0) & (qa <= 1.0)):
        raise DomainError(f"channel strength must lie in [0, 1], got {q}")
    return qa


@dataclass(frozen=True)
class KrausSet:
    """Single-qubit Kraus operators at strength ``q``; ``ops`` has shape (m, 2, 2)."""

    ops: np.ndarray
    q: float
    kind: ChannelKind = None

    def completeness(self):
        return np.einsum("kji,kjl->il", np.conj(self.ops), self.ops)

    def apply(self, rho2):
        """Apply to a single-qubit 2x2 matrix."""
        return np.einsum("kij,jl,kml->im", self.ops, rho2, np.conj(self.ops))


def make_kraus(kind, q):
    kind = ChannelKind.parse(kind)
    q = float(check_q(q))
    ops = kernels.kraus_ops(int(kind), np.array([q]))[0]
    return KrausSet(ops=ops, q=q, kind=kind)


def apply_local(rho, kind, q, side=SideSpec.BOTH, check=True):
    """Evolve one ``(4, 4)`` state or a ``(n, 4, 4)`` batch through the local channel(s).

    Raises
    ------
    DomainError
        If ``q`` is outside [0, 1].
    ConsistencyError
        If the output fails the density-matrix invariants (only with ``check``).
    """
    kind = ChannelKind.parse(kind)
    side = SideSpec.parse(side)
    check_q(q)
    rho = np.asarray(rho, dtype=complex)
    single = rho.ndim == 2
    batch = np.ascontiguousarray(rho[None] if single else rho)
    qv = np.ascontiguousarray(np.broadcast_to(np.asarray(q, dtype=float), (batch.shape[0],)))
    out = kernels.apply_local(batch, int(kind), int(side), qv)
    if check:
        try:
            validate_density_matrices(out)
        except InvalidStateError as exc:
            raise ConsistencyError(f"channel output is not a state: {exc}") from exc
    return out[0] if single else out


@dataclass(frozen=True)
class CptpReport:
    completeness_dev: float
    trace_dev: float
    tol: float

    @property
    def ok(self):
        return self.completeness_dev <= self.tol and self.trace_dev <= self.tol


def verify_cptp(k, n_states=100, seed=SeedSpec(0, 0), tol=1e-12):
    """Completeness and trace-preservation diagnostics of a Kraus set.

    Returns the max-norm deviation of sum E^dag E from the identity and the
    largest |tr(Lambda(rho)) - 1| over ``n_states`` random single-qubit
    states (partial traces of Hilbert-Schmidt two-qubit states).
    """
    ops = np.asarray(k.ops, dtype=complex)
    comp = np.einsum("kji,kjl->il", np.conj(ops), ops)
    comp_dev = float(np.max(np.abs(comp - np.eye(2))))
    rho4 = sample_hs_mixed(seed, n_states).reshape(n_states, 2, 2, 2, 2)
    rho2 = np.einsum("najbj->nab", rho4)
    out = np.einsum("kij,njl,kml->nim", ops, rho2, np.conj(ops))
    tr_dev = float(np.max(np.abs(np.trace(out, axis1=1, axis2=2) - 1.0)))
    return CptpReport(comp_dev, tr_dev, tol)
