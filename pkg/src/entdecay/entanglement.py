"""Concurrence, separation (ESD) strengths and maximum-concurrence curves.

Closed forms apply to pure initial states under identical channels on both
qubits; mixed states go through the Kraus route and the Wootters
concurrence computed by the kernels.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .channels import ChannelKind, SideSpec, check_q
from .errors import DomainError, RefinementError
from . import kernels
from .qstate import PureState, srd_arrays, validate_density_matrices

ZERO_TOL = 1e-12
ESD_TOL = 1e-8
SCAN_POINTS = 64
SCAN_END = 1.0 - 1e-6
D_LIMIT = 1.0 - 1.0 / np.sqrt(3.0)


class EsdKind(enum.IntEnum):
    FINITE = kernels.FINITE
    ASYMPTOTIC = kernels.ASYMPTOTIC
    SEPARABLE = kernels.SEPARABLE


@dataclass(frozen=True)
class EsdOutcome:
    """Separation outcome; ``q_s`` is set only for ``FINITE``."""

    kind: EsdKind
    q_s: float = float("nan")

    def __post_init__(self):
        if self.kind == EsdKind.FINITE and not 0.0 < self.q_s <= 1.0:
            raise DomainError(f"finite separation strength must lie in (0, 1], got {self.q_s}")

    @property
    def is_finite(self):
        return self.kind == EsdKind.FINITE


def FiniteTime(q_s):
    return EsdOutcome(EsdKind.FINITE, float(q_s))


def AsymptoticOnly():
    return EsdOutcome(EsdKind.ASYMPTOTIC)


def InitiallySeparable():
    return EsdOutcome(EsdKind.SEPARABLE)


def _amps(psi):
    if isinstance(psi, PureState):
        return psi.amplitudes[None]
    a = np.asarray(psi, dtype=complex)
    return a[None] if a.ndim == 1 else a


def _unwrap(x, psi):
    single = isinstance(psi, PureState) or np.ndim(psi) == 1
    return float(x[0]) if single and np.ndim(x) == 1 else x


def concurrence_pure(psi):
    """``2 |psi00 psi11 - psi01 psi10|`` for one state or an ``(n, 4)`` batch."""
    a = _amps(psi)
    c = np.minimum(2.0 * np.abs(a[:, 0] * a[:, 3] - a[:, 1] * a[:, 2]), 1.0)
    return _unwrap(c, psi)


def concurrence_mixed(rho, validate=True):
    """Wootters concurrence of a ``(4, 4)`` density matrix or an ``(n, 4, 4)`` batch.

    The square roots of the eigenvalues of ``rho rho~`` are computed as the
    singular values of ``L^T (sy x sy) L`` with ``rho = L L^dag``; this is the
    same spectrum as that of ``sqrt(rho) rho~ sqrt(rho)`` without the extra
    matrix square root.
    """
    m = rho.mat if hasattr(rho, "mat") else np.asarray(rho, dtype=complex)
    batch = np.ascontiguousarray(m[None] if m.ndim == 2 else m)
    if validate:
        validate_density_matrices(batch)
    c = kernels.concurrence(batch)
    return float(c[0]) if m.ndim == 2 else c


def concurrence_evolved(kind, q, psi):
    """Closed-form concurrence after identical channels on both qubits.

    Shapes: one state and scalar ``q`` give a float; a vector of ``q`` adds
    a trailing axis; an ``(n, 4)`` batch adds a leading one.
    """
    kind = ChannelKind.parse(kind)
    qa = check_q(q)
    a = _amps(psi)
    s, r, _, _, c0 = srd_arrays(a)
    p11 = np.abs(a[:, 3]) ** 2
    if qa.ndim:
        s, r, c0, p11 = (x[:, None] for x in (s, r, c0, p11))
    if kind == ChannelKind.D:
        c = c0 * (1.0 - qa) ** 2 - 0.5 * qa * (2.0 - qa)
    elif kind == ChannelKind.AD:
        c = (1.0 - qa) * (c0 - 2.0 * p11 * qa)
    else:
        qt = qa * (2.0 - qa)
        c = -qt * s + np.sqrt(qt * qt * r * r + (1.0 - qt) * c0 * c0)
    c = np.maximum(c, 0.0)
    if isinstance(psi, PureState) or np.ndim(psi) == 1:
        c = c[0]
        return float(c) if np.ndim(c) == 0 else c
    return c


def concurrence_single(kind, q, c0):
    """Concurrence with one channel on the first qubit: ``max(0, x(q) C0)``."""
    kind = ChannelKind.parse(kind)
    q = check_q(q)
    c0 = np.asarray(c0, dtype=float)
    if np.any((c0 < 0.0) | (c0 > 1.0)):
        raise DomainError("C0 must lie in [0, 1]")
    x = {ChannelKind.D: lambda: 1.0 - 1.5 * q,
         ChannelKind.AD: lambda: np.sqrt(1.0 - q),
         ChannelKind.PD: lambda: 1.0 - q}[kind]()
    out = np.maximum(x * c0, 0.0)
    return float(out) if out.ndim == 0 else out


def esd_analytic_arrays(kind, amps, side=SideSpec.BOTH):
    """Vectorised closed-form separation strengths.

    Returns ``(codes, q_s)`` with the :class:`EsdKind` codes and ``nan``
    wherever the outcome is not finite.
    """
    kind = ChannelKind.parse(kind)
    side = SideSpec.parse(side)
    a = _amps(amps)
    s, r, d, _, c0 = srd_arrays(a)
    n = a.shape[0]
    codes = np.full(n, int(EsdKind.FINITE), dtype=np.int8)
    q_s = np.full(n, np.nan)
    alive = c0 > ZERO_TOL
    if side == SideSpec.FIRST:
        if kind == ChannelKind.D:
            q_s[:] = 2.0 / 3.0
        else:
            codes[:] = EsdKind.ASYMPTOTIC
    elif kind == ChannelKind.D:
        q_s = 1.0 - 1.0 / np.sqrt(1.0 + 2.0 * c0)
    elif kind == ChannelKind.AD:
        twice_p11 = 2.0 * np.abs(a[:, 3]) ** 2
        finite = c0 <= twice_p11
        with np.errstate(divide="ignore", invalid="ignore"):
            q_s = np.where(finite, np.minimum(c0 / twice_p11, 1.0), np.nan)
        codes[~finite] = EsdKind.ASYMPTOTIC
    else:
        finite = d > 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            # (sqrt(C0^2 + d^2) - C0) / d written without cancellation
            q_s = np.where(finite, 1.0 - d / (np.hypot(c0, d) + c0), np.nan)
        codes[~finite] = EsdKind.ASYMPTOTIC
    q_s = np.where(codes == EsdKind.FINITE, q_s, np.nan)
    codes[~alive] = EsdKind.SEPARABLE
    q_s[~alive] = np.nan
    return codes, q_s


def _outcome(code, q_s):
    if code == EsdKind.FINITE:
        return FiniteTime(q_s)
    if code == EsdKind.ASYMPTOTIC:
        return AsymptoticOnly()
    return InitiallySeparable()


def esd_time_analytic(kind, psi, side=SideSpec.BOTH):
    """Closed-form separation outcome of a pure state."""
    codes, q_s = esd_analytic_arrays(kind, _amps(psi)[:1], side)
    return _outcome(codes[0], q_s[0])


def scan_grid(points=SCAN_POINTS):
    return np.linspace(0.0, SCAN_END, points)


def esd_numeric_arrays(rho0, kind, side=SideSpec.BOTH, tol=ESD_TOL, points=SCAN_POINTS):
    """Scan-and-bisect separation strengths for an ``(n, 4, 4)`` batch.

    Codes follow :class:`EsdKind`, with the extra code
    ``kernels.UNBRACKETED`` for states whose concurrence revives after the
    first zero on the scan grid.
    """
    kind = ChannelKind.parse(kind)
    side = SideSpec.parse(side)
    if not tol > 0.0:
        raise DomainError("tol must be positive")
    rho0 = np.ascontiguousarray(rho0, dtype=complex)
    return kernels.esd_numeric(rho0, int(kind), int(side), float(tol),
                               scan_grid(points), ZERO_TOL)


def esd_time_numeric(rho0, kind, side=SideSpec.BOTH, tol=ESD_TOL, points=SCAN_POINTS):
    """Numeric separation outcome of a (possibly mixed) state.

    Raises
    ------
    RefinementError
        If the concurrence vanishes on the scan grid and later revives, so
        the first crossing cannot be bracketed; retry with more points.
    """
    m = rho0.mat if hasattr(rho0, "mat") else np.asarray(rho0, dtype=complex)
    validate_density_matrices(m[None])
    codes, q_s = esd_numeric_arrays(m[None], kind, side, tol, points)
    if codes[0] == kernels.UNBRACKETED:
        raise RefinementError(
            f"concurrence revives after vanishing on the {points}-point grid; use a denser grid")
    return _outcome(codes[0], q_s[0])


def max_concurrence(kind, q, side=SideSpec.BOTH):
    """Largest concurrence reachable at strength ``q`` from any pure state."""
    kind = ChannelKind.parse(kind)
    side = SideSpec.parse(side)
    q = check_q(q)
    if side == SideSpec.FIRST:
        out = concurrence_single(kind, q, 1.0)
        return out
    if kind == ChannelKind.D:
        out = np.maximum(1.0 - 1.5 * q * (2.0 - q), 0.0)
    elif kind == ChannelKind.AD:
        out = 1.0 - q
    else:
        out = (1.0 - q) ** 2
    return float(out) if np.ndim(out) == 0 else out
