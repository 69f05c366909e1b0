# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the per-state inner loops.

Mirrors :mod:`entdecay._kernels_py` function for function; see that module
for the integer encodings of channel kinds, sides and ESD codes.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot, copysign, NAN

cnp.import_array()

cdef double JACOBI_TOL = 1e-13
cdef int MAX_SWEEPS = 60
# eigenvalues below this fraction of the largest are rounding noise
cdef double RANK_TOL = 2.0 * 2.220446049250313e-16


cdef inline double cabs2(double complex z) noexcept nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline double complex conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


cdef inline void rotation(double app, double aqq, double complex apq,
                          double *c, double *s, double complex *e) noexcept nogil:
    cdef double b = sqrt(cabs2(apq))
    cdef double theta, t
    if b <= 1e-290:
        c[0] = 1.0
        s[0] = 0.0
        e[0] = 1.0
        return
    e[0] = apq / b
    theta = (aqq - app) / (2.0 * b)
    if theta == 0.0:
        t = 1.0
    else:
        t = copysign(1.0, theta) / (fabs(theta) + hypot(theta, 1.0))
    c[0] = 1.0 / sqrt(t * t + 1.0)
    s[0] = t * c[0]


cdef void jacobi_herm(double complex *a, double complex *v, double *w, int n) noexcept nogil:
    """In-place cyclic Jacobi; a (n x n, row major) is destroyed."""
    cdef int i, j, p, q, sweep, k
    cdef double off, scale, c, s, tmpw
    cdef double complex e, ap, aq, tmpv
    for i in range(n):
        for j in range(n):
            v[i * n + j] = 1.0 if i == j else 0.0
    scale = 0.0
    for i in range(n * n):
        scale += cabs2(a[i])
    scale = sqrt(scale)
    if scale == 0.0:
        scale = 1.0
    for sweep in range(MAX_SWEEPS):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += cabs2(a[i * n + j])
        if sqrt(off) <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                rotation(a[p * n + p].real, a[q * n + q].real, a[p * n + q], &c, &s, &e)
                if s == 0.0 and e == 1.0:
                    continue
                for k in range(n):
                    ap = a[k * n + p]
                    aq = a[k * n + q]
                    a[k * n + p] = c * ap - s * conj(e) * aq
                    a[k * n + q] = s * ap + c * conj(e) * aq
                for k in range(n):
                    ap = a[p * n + k]
                    aq = a[q * n + k]
                    a[p * n + k] = c * ap - s * e * aq
                    a[q * n + k] = s * ap + c * e * aq
                a[p * n + q] = 0.0
                a[q * n + p] = 0.0
                for k in range(n):
                    ap = v[k * n + p]
                    aq = v[k * n + q]
                    v[k * n + p] = c * ap - s * conj(e) * aq
                    v[k * n + q] = s * ap + c * conj(e) * aq
    for i in range(n):
        w[i] = a[i * n + i].real
    # selection sort, descending (n <= 8)
    for i in range(n - 1):
        k = i
        for j in range(i + 1, n):
            if w[j] > w[k]:
                k = j
        if k != i:
            tmpw = w[i]
            w[i] = w[k]
            w[k] = tmpw
            for j in range(n):
                tmpv = v[j * n + i]
                v[j * n + i] = v[j * n + k]
                v[j * n + k] = tmpv


cdef void hestenes(double complex *a, int rows, int n, double *sv) noexcept nogil:
    """One-sided Jacobi singular values of a (rows x n, row major), descending."""
    cdef int p, q, k, sweep, i, j
    cdef double alpha, beta, worst, rel, c, s, tmp
    cdef double complex gamma, e, ap, aq
    for sweep in range(MAX_SWEEPS):
        worst = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(rows):
                    alpha += cabs2(a[k * n + p])
                    beta += cabs2(a[k * n + q])
                    gamma += conj(a[k * n + p]) * a[k * n + q]
                if alpha * beta > 0.0:
                    rel = sqrt(cabs2(gamma) / (alpha * beta))
                    if rel > worst:
                        worst = rel
                rotation(alpha, beta, gamma, &c, &s, &e)
                if s == 0.0 and e == 1.0:
                    continue
                for k in range(rows):
                    ap = a[k * n + p]
                    aq = a[k * n + q]
                    a[k * n + p] = c * ap - s * conj(e) * aq
                    a[k * n + q] = s * ap + c * conj(e) * aq
        if worst <= 1e-15:
            break
    for j in range(n):
        tmp = 0.0
        for k in range(rows):
            tmp += cabs2(a[k * n + j])
        sv[j] = sqrt(tmp)
    for i in range(n - 1):
        k = i
        for j in range(i + 1, n):
            if sv[j] > sv[k]:
                k = j
        if k != i:
            tmp = sv[i]
            sv[i] = sv[k]
            sv[k] = tmp


# sigma_y (x) sigma_y is real: antidiagonal (-1, 1, 1, -1)
cdef double FLIP_SIGN[4]
FLIP_SIGN[:] = [-1.0, 1.0, 1.0, -1.0]


cdef double conc_raw(const double complex *rho) noexcept nogil:
    cdef double complex a[16]
    cdef double complex v[16]
    cdef double complex f[16]
    cdef double complex t[16]
    cdef double w[4]
    cdef double sv[4]
    cdef double root, cut
    cdef int i, j, k
    cdef double complex acc
    for i in range(16):
        a[i] = rho[i]
    jacobi_herm(a, v, w, 4)
    cut = 0.0
    for j in range(4):
        if w[j] > cut:
            cut = w[j]
    cut = RANK_TOL * cut
    for j in range(4):
        root = sqrt(w[j]) if w[j] > cut else 0.0
        for i in range(4):
            f[i * 4 + j] = v[i * 4 + j] * root
    # t = f^T Y f with (Y f)[k, j] = FLIP_SIGN[k] * f[3 - k, j]
    for i in range(4):
        for j in range(4):
            acc = 0.0
            for k in range(4):
                acc = acc + f[k * 4 + i] * FLIP_SIGN[k] * f[(3 - k) * 4 + j]
            t[i * 4 + j] = acc
    hestenes(t, 4, 4, sv)
    return sv[0] - sv[1] - sv[2] - sv[3]


cdef int kraus(int kind, double q, double complex *ops) noexcept nogil:
    """Fill ops (m x 2 x 2, row major) and return m."""
    cdef int i
    cdef double a, b
    for i in range(16):
        ops[i] = 0.0
    if kind == 0:
        a = sqrt(1.0 - 0.75 * q)
        b = sqrt(0.25 * q)
        ops[0] = a
        ops[3] = a
        ops[5] = b
        ops[6] = b
        ops[9] = -1j * b
        ops[10] = 1j * b
        ops[12] = b
        ops[15] = -b
        return 4
    if kind == 1:
        ops[0] = 1.0
        ops[3] = sqrt(1.0 - q)
        ops[5] = sqrt(q)
        return 2
    a = sqrt(1.0 - q)
    b = sqrt(q)
    ops[0] = a
    ops[3] = a
    ops[4] = b
    ops[11] = b
    return 3


cdef void apply4(const double complex *rho, int kind, int side, double q,
                 double complex *out) noexcept nogil:
    cdef double complex ops[16]
    cdef double complex tmp[16]
    cdef double complex acc
    cdef int m, k, a, b, c, d, e, f
    m = kraus(kind, q, ops)
    # first qubit: tmp[(a,b),(e,f)] = sum_k K[a,c] rho[(c,b),(d,f)] conj(K[e,d])
    for a in range(2):
        for b in range(2):
            for e in range(2):
                for f in range(2):
                    acc = 0.0
                    for k in range(m):
                        for c in range(2):
                            if ops[k * 4 + a * 2 + c] == 0.0:
                                continue
                            for d in range(2):
                                acc = acc + ops[k * 4 + a * 2 + c] * rho[(c * 2 + b) * 4 + d * 2 + f] * conj(ops[k * 4 + e * 2 + d])
                    tmp[(a * 2 + b) * 4 + e * 2 + f] = acc
    if side == 0:
        for a in range(2):
            for b in range(2):
                for d in range(2):
                    for f in range(2):
                        acc = 0.0
                        for k in range(m):
                            for c in range(2):
                                if ops[k * 4 + b * 2 + c] == 0.0:
                                    continue
                                for e in range(2):
                                    acc = acc + ops[k * 4 + b * 2 + c] * tmp[(a * 2 + c) * 4 + d * 2 + e] * conj(ops[k * 4 + f * 2 + e])
                        out[(a * 2 + b) * 4 + d * 2 + f] = acc
    else:
        for a in range(16):
            out[a] = tmp[a]
    for a in range(4):
        for b in range(a, 4):
            acc = 0.5 * (out[a * 4 + b] + conj(out[b * 4 + a]))
            out[a * 4 + b] = acc
            out[b * 4 + a] = conj(acc)


def herm_eig(h):
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] a = np.array(h, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t nb = a.shape[0], n = a.shape[1], i
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] v = np.empty_like(a)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] w = np.empty((nb, n))
    cdef double complex *pa = <double complex *> a.data
    cdef double complex *pv = <double complex *> v.data
    cdef double *pw = <double *> w.data
    with nogil:
        for i in range(nb):
            jacobi_herm(pa + i * n * n, pv + i * n * n, pw + i * n, <int> n)
    return w, v


def singular_values(m):
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] a = np.array(m, dtype=np.complex128, order="C", copy=True)
    cdef Py_ssize_t nb = a.shape[0], rows = a.shape[1], n = a.shape[2], i
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sv = np.empty((nb, n))
    cdef double complex *pa = <double complex *> a.data
    cdef double *ps = <double *> sv.data
    with nogil:
        for i in range(nb):
            hestenes(pa + i * rows * n, <int> rows, <int> n, ps + i * n)
    return sv


def concurrence(rho, clamp=True):
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t nb = r.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(nb)
    cdef double complex *pr = <double complex *> r.data
    cdef double *po = <double *> out.data
    cdef bint cl = bool(clamp)
    cdef double c
    with nogil:
        for i in range(nb):
            c = conc_raw(pr + 16 * i)
            po[i] = c if (c > 0.0 or not cl) else 0.0
    return out


def apply_local(rho, int kind, int side, q):
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t nb = r.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qv = np.ascontiguousarray(
        np.broadcast_to(np.asarray(q, dtype=np.float64), (nb,)))
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] out = np.empty((nb, 4, 4), dtype=np.complex128)
    cdef double complex *pr = <double complex *> r.data
    cdef double complex *po = <double complex *> out.data
    cdef double *pq = <double *> qv.data
    if kind < 0 or kind > 2:
        raise ValueError(f"unknown channel kind code {kind}")
    with nogil:
        for i in range(nb):
            apply4(pr + 16 * i, kind, side, pq[i], po + 16 * i)
    return out


def evolved_concurrence(rho0, int kind, int side, qs):
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] r = np.ascontiguousarray(rho0, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qv = np.ascontiguousarray(qs, dtype=np.float64)
    cdef Py_ssize_t nb = r.shape[0], nq = qv.shape[0], i, j
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nb, nq))
    cdef double complex *pr = <double complex *> r.data
    cdef double *pq = <double *> qv.data
    cdef double *po = <double *> out.data
    cdef double complex buf[16]
    cdef double c
    with nogil:
        for i in range(nb):
            for j in range(nq):
                apply4(pr + 16 * i, kind, side, pq[j], buf)
                c = conc_raw(buf)
                po[i * nq + j] = c if c > 0.0 else 0.0
    return out


cdef inline double evolved(const double complex *rho, int kind, int side, double q) noexcept nogil:
    cdef double complex buf[16]
    cdef double c
    apply4(rho, kind, side, q, buf)
    c = conc_raw(buf)
    return c if c > 0.0 else 0.0


def esd_numeric(rho0, int kind, int side, double tol, q_grid, double zero_tol):
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] r = np.ascontiguousarray(rho0, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g = np.ascontiguousarray(q_grid, dtype=np.float64)
    cdef Py_ssize_t nb = r.shape[0], ng = g.shape[0], i, j, first
    cdef cnp.ndarray[cnp.int8_t, ndim=1] codes = np.empty(nb, dtype=np.int8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qs = np.empty(nb)
    cdef double complex *pr = <double complex *> r.data
    cdef double *pg = <double *> g.data
    cdef signed char *pc = <signed char *> codes.data
    cdef double *pq = <double *> qs.data
    cdef double lo, hi, mid, c
    cdef bint revived
    with nogil:
        for i in range(nb):
            pq[i] = NAN
            c = conc_raw(pr + 16 * i)
            if not c > zero_tol:
                pc[i] = 2
                continue
            first = -1
            revived = False
            for j in range(1, ng):
                c = evolved(pr + 16 * i, kind, side, pg[j])
                # exact zero marks death; zero_tol only screens the initial state
                if c <= 0.0:
                    if first < 0:
                        first = j
                elif first >= 0:
                    revived = True
                    break
            if first < 0:
                pc[i] = 1
                continue
            if revived:
                pc[i] = 3
                continue
            lo = pg[first - 1]
            hi = pg[first]
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if evolved(pr + 16 * i, kind, side, mid) <= 0.0:
                    hi = mid
                else:
                    lo = mid
            pc[i] = 0
            pq[i] = 0.5 * (lo + hi)
    return codes, qs
