"""Small dense complex linear algebra, elliptic integrals and quadrature.

Matrices are plain ``numpy`` complex arrays of shape (2, 2) or (4, 4).
Eigenproblems go through the batched Jacobi kernels in
:mod:`entdecay.kernels` so that the compiled and the fallback route share
one contract.
"""
import heapq
import math

import numpy as np

from .errors import AccuracyError, DomainError, InvalidStateError
from . import kernels

__all__ = [
    "I2", "I4", "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "PAULI", "SPIN_FLIP",
    "EigResult", "kron", "hermitian_eig", "psd_sqrt", "agm", "elliptic_k",
    "adaptive_quad",
]

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

HERMITIAN_TOL = 1e-10
CLAMP_TOL = 1e-10
NEGATIVE_TOL = 1e-8


def _check_finite(a, name):
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")


def kron(a, b):
    """Kronecker product of two 2x2 matrices in the |00>,|01>,|10>,|11> order."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DomainError(f"kron expects two 2x2 matrices, got {a.shape} and {b.shape}")
    _check_finite(a, "a")
    _check_finite(b, "b")
    return np.kron(a, b)


SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)


class EigResult:
    """Eigen-decomposition of a Hermitian matrix.

    ``eigenvalues`` are real and sorted in descending order; the columns of
    ``eigenvectors`` are the matching orthonormal eigenvectors.
    """

    __slots__ = ("eigenvalues", "eigenvectors")

    def __init__(self, eigenvalues, eigenvectors):
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_eig(h):
    """Cyclic Jacobi eigen-decomposition of a small Hermitian matrix.

    Raises
    ------
    DomainError
        If ``h`` is not square or deviates from Hermitian by more than 1e-10
        in max norm.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {h.shape}")
    _check_finite(h, "h")
    if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL:
        raise DomainError("matrix is not Hermitian")
    w, v = kernels.herm_eig(np.ascontiguousarray(h[None, :, :]))
    return EigResult(w[0], v[0])


def psd_sqrt(h):
    """Hermitian PSD square root; tiny negative eigenvalues are clamped to 0."""
    w, v = hermitian_eig(h)
    if w[-1] < -NEGATIVE_TOL:
        raise InvalidStateError(f"matrix has a negative eigenvalue {w[-1]:.3e}")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def agm(a, b):
    """Arithmetic-geometric mean of positive numbers (scalar or array)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for _ in range(64):
        if np.all(np.abs(a - b) <= 1e-15 * np.abs(a)):
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_k(m):
    """Complete elliptic integral of the first kind, parameter form K(m), m = k**2.

    Works on scalars and arrays. ``m`` may be negative; ``m >= 1`` raises
    :class:`DomainError` (logarithmic singularity at ``m = 1``).
    """
    marr = np.asarray(m, dtype=float)
    if np.any(~(marr < 1.0)):
        raise DomainError("elliptic_k requires m < 1")
    k = math.pi / (2.0 * agm(np.ones_like(marr), np.sqrt(1.0 - marr)))
    return float(k) if np.ndim(m) == 0 else k


# Gauss-Kronrod 7/15 abscissae (positive half) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5 on each side + centre).
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:3], [_WG[3]], _WG[:3][::-1]])


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _NODES
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        raise AccuracyError(f"integrand not finite on [{a}, {b}]")
    k = half * float(_KWEIGHTS @ y)
    g = half * float(_GWEIGHTS @ y)
    return k, abs(k - g)


def _with_singular_endpoints(f, a, b, singular):
    """Map [a, b] so that 1/sqrt-type endpoint singularities disappear.

    Returns a list of ``(integrand, lo, hi)`` pieces in the new variable.
    """
    if singular is None:
        return [(f, a, b)]
    if singular == "left":
        return [(lambda u: 2.0 * u * f(a + u * u), 0.0, math.sqrt(b - a))]
    if singular == "right":
        return [(lambda u: 2.0 * u * f(b - u * u), 0.0, math.sqrt(b - a))]
    if singular == "both":
        mid = 0.5 * (a + b)
        return (_with_singular_endpoints(f, a, mid, "left")
                + _with_singular_endpoints(f, mid, b, "right"))
    raise DomainError(f"unknown singular-endpoint flag {singular!r}")


def adaptive_quad(f, a, b, tol=1e-10, *, rel_tol=0.0, singular=None,
                  vectorized=True, max_subdivisions=2000, full_output=False):
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of ``f`` over [a, b].

    Parameters
    ----------
    f : callable
        Integrand. With ``vectorized=True`` (default) it receives a numpy
        array of abscissae and must return an array of the same shape.
    a, b : float
        Limits, ``a < b``.
    tol : float
        Target absolute error.
    rel_tol : float
        Optional relative error target; convergence when either is met.
    singular : {None, 'left', 'right', 'both'}
        Apply the substitution ``x = a + u**2`` (resp. ``b - u**2``) at the
        flagged endpoints to absorb integrable inverse-square-root
        singularities.
    max_subdivisions : int
        Interval budget; exceeding it raises :class:`AccuracyError` carrying
        the best estimate and its error bound.
    full_output : bool
        Return ``(value, error)`` instead of the value alone.
    """
    if not a < b:
        if a == b:
            return (0.0, 0.0) if full_output else 0.0
        raise DomainError(f"adaptive_quad requires a < b, got a={a}, b={b}")
    if not vectorized:
        scalar_f = f
        f = lambda x: np.array([scalar_f(float(xi)) for xi in np.ravel(x)]).reshape(np.shape(x))

    heap = []
    total = 0.0
    total_err = 0.0
    tie = 0
    for g, lo, hi in _with_singular_endpoints(f, a, b, singular):
        val, err = _gk15(g, lo, hi)
        total += val
        total_err += err
        heapq.heappush(heap, (-err, tie, lo, hi, val, g))
        tie += 1

    n = len(heap)
    while total_err > max(tol, rel_tol * abs(total)):
        if n >= max_subdivisions:
            raise AccuracyError(
                f"adaptive_quad did not converge in {max_subdivisions} subdivisions "
                f"(estimate {total:.12g}, error {total_err:.3e})",
                estimate=total, error=total_err,
            )
        neg_err, _, lo, hi, val, g = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise AccuracyError("interval collapsed below machine resolution",
                                estimate=total, error=total_err)
        v1, e1 = _gk15(g, lo, mid)
        v2, e2 = _gk15(g, mid, hi)
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, tie, lo, mid, v1, g))
        heapq.heappush(heap, (-e2, tie + 1, mid, hi, v2, g))
        tie += 2
        n += 1
    # Recompute sums from the leaves to shed accumulated round-off.
    total = math.fsum(item[4] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return (total, total_err) if full_output else total
