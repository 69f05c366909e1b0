"""Two-qubit states and the random-state ensembles.

Amplitudes are ordered |00>, |01>, |10>, |11>. Batched samplers return
plain arrays: ``(n, 4)`` amplitudes for pure states and ``(n, 4, 4)``
density matrices for mixed ones; :class:`PureState` and
:class:`DensityMatrix` wrap single states with validation.

Random numbers come from a counter-based Philox generator keyed by
``(seed, stream)``, so every stream is an independent, reproducible
sequence and workers never overlap.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, InvalidStateError
from . import kernels

NORM_TOL = 1e-12
HERM_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_TOL = 1e-9

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeedSpec:
    """Seed and stream index; together they fix the sample sequence."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not 0 <= v <= _U64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self):
        bitgen = np.random.Philox(key=(self.stream << 64) | self.seed)
        return np.random.Generator(bitgen)


def complex_normals(gen, shape):
    """Standard complex Gaussians (E|z|^2 = 1) by Box-Muller on uniform doubles."""
    u = gen.random((2,) + tuple(shape))
    radius = np.sqrt(-np.log1p(-u[0]))
    return radius * np.exp(2j * np.pi * u[1])


@dataclass(frozen=True)
class PureState:
    """Normalized two-qubit pure state."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.shape != (4,):
            raise InvalidStateError(f"expected 4 amplitudes, got {a.size}")
        if not np.all(np.isfinite(a)):
            raise InvalidStateError("amplitudes must be finite")
        if abs(np.vdot(a, a).real - 1.0) > NORM_TOL:
            raise InvalidStateError("amplitudes are not normalized")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_unnormalized(cls, amps):
        a = np.asarray(amps, dtype=complex).reshape(-1)
        return cls(a / np.linalg.norm(a))

    def projector(self):
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density_matrix(self):
        return DensityMatrix(self.projector())


@dataclass(frozen=True)
class DensityMatrix:
    """4x4 Hermitian, unit-trace, positive semidefinite matrix."""

    mat: np.ndarray

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        validate_density_matrices(m[None])
        object.__setattr__(self, "mat", m)

    def purity(self):
        return float(np.real(np.trace(self.mat @ self.mat)))


def validate_density_matrices(rho, eig_tol=EIG_TOL):
    """Raise :class:`InvalidStateError` unless every matrix in the batch is a state."""
    rho = np.asarray(rho)
    if rho.ndim != 3 or rho.shape[1:] != (4, 4):
        raise InvalidStateError(f"expected shape (n, 4, 4), got {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("density matrix has non-finite entries")
    herm = np.max(np.abs(rho - np.conj(np.transpose(rho, (0, 2, 1)))), axis=(1, 2))
    if np.any(herm > HERM_TOL):
        raise InvalidStateError(f"not Hermitian (deviation {herm.max():.2e})")
    tr = np.trace(rho, axis1=1, axis2=2)
    if np.any(np.abs(tr - 1.0) > TRACE_TOL):
        raise InvalidStateError("trace differs from 1")
    w, _ = kernels.herm_eig(rho)
    if np.any(w[:, -1] < -eig_tol):
        raise InvalidStateError(f"negative eigenvalue {w[:, -1].min():.2e}")


def sample_haar_pure(seed, n):
    """Haar-random pure states as an ``(n, 4)`` amplitude array."""
    if n < 1:
        raise DomainError("n must be at least 1")
    z = complex_normals(seed.generator(), (n, 4))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _ginibre(gen, n):
    return complex_normals(gen, (n, 4, 4))


def _normalize_gram(g):
    rho = g @ np.conj(np.transpose(g, (0, 2, 1)))
    rho = 0.5 * (rho + np.conj(np.transpose(rho, (0, 2, 1))))
    tr = np.real(np.trace(rho, axis1=1, axis2=2))
    return rho / tr[:, None, None]


def sample_hs_mixed(seed, n):
    """Hilbert-Schmidt random density matrices, ``rho = G G^dag / tr``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    return _normalize_gram(_ginibre(seed.generator(), n))


def haar_unitaries(gen, n):
    """Haar-random 4x4 unitaries: QR of a Ginibre matrix with the phase fix."""
    q, r = np.linalg.qr(_ginibre(gen, n))
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def sample_bures_mixed(seed, n):
    """Bures random density matrices, ``(I + U) G G^dag (I + U^dag) / tr``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    gen = seed.generator()
    u = haar_unitaries(gen, n)
    g = _ginibre(gen, n)
    return _normalize_gram((np.eye(4) + u) @ g)


def projectors(amps):
    """Batch of pure-state projectors from an ``(n, 4)`` amplitude array."""
    amps = np.asarray(amps, dtype=complex)
    return np.einsum("ni,nj->nij", amps, np.conj(amps))


class SRD(NamedTuple):
    s: float
    r: float
    d: float
    theta: float
    c0: float


def srd_arrays(amps):
    """Vectorised invariants (s, r, d, theta, C0) of an ``(n, 4)`` amplitude array.

    ``s`` and ``r`` are the sum and absolute difference of |psi00 psi11| and
    |psi01 psi10|; ``theta`` is the relative phase of the two products in
    [0, 2pi), reported as 0 when either product vanishes.
    """
    amps = np.atleast_2d(np.asarray(amps, dtype=complex))
    diag = amps[:, 0] * amps[:, 3]
    anti = amps[:, 1] * amps[:, 2]
    a = np.abs(diag)
    b = np.abs(anti)
    s = a + b
    r = np.abs(a - b)
    d = 4.0 * np.sqrt(a * b)
    theta = np.where((a > 0) & (b > 0),
                     np.mod(np.angle(diag) - np.angle(anti), 2.0 * np.pi), 0.0)
    c0 = np.minimum(2.0 * np.abs(diag - anti), 1.0)
    return s, r, d, theta, c0


def srd_invariants(psi):
    """Invariants (s, r, d, theta, C0) of a single pure state."""
    amps = psi.amplitudes if isinstance(psi, PureState) else PureState(psi).amplitudes
    return SRD(*(float(x[0]) for x in srd_arrays(amps[None])))


def c0_from_srd(s, r, theta):
    """Initial concurrence from (s, r, theta); inverts :func:`srd_arrays`."""
    shifted = np.pi - np.asarray(theta)
    val = 2.0 * (s * s + r * r + (s * s - r * r) * np.cos(shifted))
    return np.sqrt(np.clip(val, 0.0, None))
