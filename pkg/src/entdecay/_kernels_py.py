"""Pure-numpy kernels, vectorised over a leading batch axis.

Same contract as the compiled ``_ckernels`` extension; used when the
extension is not built or ``ENTDECAY_PURE_PYTHON=1`` is set.

Channel kinds are encoded as 0 = depolarizing, 1 = amplitude damping,
2 = phase damping; sides as 0 = both qubits, 1 = first qubit only.
ESD codes: 0 finite time, 1 asymptotic only, 2 initially separable,
3 crossing not bracketable on the scan grid.
"""
import numpy as np

JACOBI_TOL = 1e-13
MAX_SWEEPS = 60
RANK_TOL = 2.0 * np.finfo(float).eps

_SY = np.array([[0, -1j], [1j, 0]])
SPIN_FLIP = np.kron(_SY, _SY)

_PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def _rotation(app, aqq, apq):
    """Jacobi rotation (c, s, phase) annihilating the (p, q) entry."""
    b = np.abs(apq)
    nz = b > 1e-290
    safe_b = np.where(nz, b, 1.0)
    e = np.where(nz, apq / safe_b, 1.0)
    with np.errstate(over="ignore"):
        theta = np.where(nz, (aqq - app) / (2.0 * safe_b), 0.0)
        t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(nz, np.where(theta == 0.0, 1.0, t), 0.0)
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c, e


def herm_eig(h):
    """Batched cyclic Jacobi eigen-decomposition of Hermitian matrices.

    Parameters
    ----------
    h : complex array, shape (N, n, n)

    Returns
    -------
    w : float array, shape (N, n), descending
    v : complex array, shape (N, n, n), eigenvectors in columns
    """
    a = np.array(h, dtype=complex, copy=True)
    nb, n, _ = a.shape
    v = np.broadcast_to(np.eye(n, dtype=complex), a.shape).copy()
    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(1, 2)))
    scale = np.where(scale > 0.0, scale, 1.0)
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(a[:, offmask]) ** 2, axis=1))
        if np.all(off <= JACOBI_TOL * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                c, s, e = _rotation(a[:, p, p].real, a[:, q, q].real, a[:, p, q])
                c = c[:, None]
                s = s[:, None]
                e = e[:, None]
                colp = a[:, :, p].copy()
                colq = a[:, :, q]
                a[:, :, p] = c * colp - s * np.conj(e) * colq
                a[:, :, q] = s * colp + c * np.conj(e) * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :]
                a[:, p, :] = c * rowp - s * e * rowq
                a[:, q, :] = s * rowp + c * e * rowq
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                vp = v[:, :, p].copy()
                vq = v[:, :, q]
                v[:, :, p] = c * vp - s * np.conj(e) * vq
                v[:, :, q] = s * vp + c * np.conj(e) * vq
    w = np.real(np.diagonal(a, axis1=1, axis2=2))
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def singular_values(m):
    """Batched one-sided (Hestenes) Jacobi singular values, descending."""
    a = np.array(m, dtype=complex, copy=True)
    nb, rows, n = a.shape
    for _ in range(MAX_SWEEPS):
        worst = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                cp = a[:, :, p]
                cq = a[:, :, q]
                alpha = np.sum(np.abs(cp) ** 2, axis=1)
                beta = np.sum(np.abs(cq) ** 2, axis=1)
                gamma = np.sum(np.conj(cp) * cq, axis=1)
                denom = np.sqrt(alpha * beta)
                rel = np.where(denom > 0.0, np.abs(gamma) / np.where(denom > 0.0, denom, 1.0), 0.0)
                worst = max(worst, float(rel.max(initial=0.0)))
                c, s, e = _rotation(alpha, beta, gamma)
                c = c[:, None]
                s = s[:, None]
                ce = np.conj(e)[:, None]
                newp = c * cp - s * ce * cq
                newq = s * cp + c * ce * cq
                a[:, :, p] = newp
                a[:, :, q] = newq
        if worst <= 1e-15:
            break
    sv = np.sqrt(np.sum(np.abs(a) ** 2, axis=1))
    return -np.sort(-sv, axis=1)


def concurrence(rho, clamp=True):
    """Wootters concurrence of a batch of 4x4 density matrices.

    The square roots of the eigenvalues of rho * rho_tilde are the singular
    values of L^T (sy x sy) L for any factor rho = L L^dagger; the factor is
    L = V diag(sqrt(w)) from the Jacobi decomposition of rho.
    """
    w, v = herm_eig(rho)
    # eigenvalues below the rounding level of the largest one are zeros
    cut = RANK_TOL * np.max(w, axis=1, keepdims=True)
    root = np.sqrt(np.where(w > cut, w, 0.0))
    factor = v * root[:, None, :]
    t = np.transpose(factor, (0, 2, 1)) @ SPIN_FLIP @ factor
    sv = singular_values(t)
    raw = sv[:, 0] - sv[:, 1] - sv[:, 2] - sv[:, 3]
    return np.maximum(raw, 0.0) if clamp else raw


def kraus_ops(kind, q):
    """Kraus operators for a vector of strengths, shape (N, m, 2, 2)."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    nb = q.shape[0]
    if kind == 0:
        coef = np.stack([np.sqrt(1.0 - 0.75 * q)] + [np.sqrt(0.25 * q)] * 3, axis=1)
        return coef[:, :, None, None] * _PAULI[None, :, :, :]
    if kind == 1:
        ops = np.zeros((nb, 2, 2, 2), dtype=complex)
        ops[:, 0, 0, 0] = 1.0
        ops[:, 0, 1, 1] = np.sqrt(1.0 - q)
        ops[:, 1, 0, 1] = np.sqrt(q)
        return ops
    if kind == 2:
        ops = np.zeros((nb, 3, 2, 2), dtype=complex)
        sq = np.sqrt(q)
        ops[:, 0, 0, 0] = ops[:, 0, 1, 1] = np.sqrt(1.0 - q)
        ops[:, 1, 0, 0] = sq
        ops[:, 2, 1, 1] = sq
        return ops
    raise ValueError(f"unknown channel kind code {kind}")


def apply_local(rho, kind, side, q):
    """Apply identical local channels (or one, on the first qubit) to a batch.

    ``q`` is a scalar or one strength per matrix. The two-qubit Kraus sum is
    done as two sequential single-qubit sums, then Hermitised.
    """
    rho = np.asarray(rho, dtype=complex)
    nb = rho.shape[0]
    q = np.broadcast_to(np.asarray(q, dtype=float), (nb,))
    ops = kraus_ops(kind, q)
    t = rho.reshape(nb, 2, 2, 2, 2)  # indices: a b , a' b'
    t = np.einsum("nkac,ncbdf,nked->nabef", ops, t, np.conj(ops), optimize=True)
    if side == 0:
        t = np.einsum("nkbc,nacde,nkfe->nabdf", ops, t, np.conj(ops), optimize=True)
    out = t.reshape(nb, 4, 4)
    return 0.5 * (out + np.conj(np.transpose(out, (0, 2, 1))))


def evolved_concurrence(rho0, kind, side, qs):
    """Concurrence of each state after the channel, on a grid of strengths.

    Returns an array of shape (N, len(qs)).
    """
    rho0 = np.asarray(rho0, dtype=complex)
    qs = np.asarray(qs, dtype=float)
    out = np.empty((rho0.shape[0], qs.shape[0]))
    for j, q in enumerate(qs):
        out[:, j] = concurrence(apply_local(rho0, kind, side, q))
    return out


def esd_numeric(rho0, kind, side, tol, q_grid, zero_tol):
    """Scan-and-bisect separation strengths for a batch of initial states.

    Returns (codes, q_s) with q_s = nan unless code == 0.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    nb = rho0.shape[0]
    q_grid = np.asarray(q_grid, dtype=float)
    codes = np.full(nb, 1, dtype=np.int8)
    q_s = np.full(nb, np.nan)

    c0 = concurrence(rho0)
    alive0 = c0 > zero_tol
    codes[~alive0] = 2

    scan = evolved_concurrence(rho0[alive0], kind, side, q_grid[1:])
    # past a genuine root the clamped concurrence is exactly zero, while
    # asymptotic states stay well above rounding noise up to the scan end
    dead = scan <= 0.0
    has_death = dead.any(axis=1)
    first = np.argmax(dead, axis=1)
    # any revival after the first death means the crossing is not bracketable
    after = np.arange(dead.shape[1])[None, :] > first[:, None]
    revived = has_death & np.any(after & ~dead, axis=1)

    idx_alive = np.flatnonzero(alive0)
    codes[idx_alive[has_death]] = 0
    codes[idx_alive[revived]] = 3

    sel = has_death & ~revived
    if np.any(sel):
        rows = idx_alive[sel]
        lo = q_grid[first[sel]]
        hi = q_grid[first[sel] + 1]
        sub = rho0[rows]
        while np.max(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            cm = concurrence(apply_local(sub, kind, side, mid))
            is_dead = cm <= 0.0
            hi = np.where(is_dead, mid, hi)
            lo = np.where(is_dead, lo, mid)
        q_s[rows] = 0.5 * (lo + hi)
    return codes, q_s
