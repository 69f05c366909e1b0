"""Closed-form and quadrature densities over the Haar ensemble of pure states.

Separation-strength densities ``p_qs`` and evolved-concurrence densities
``p_c`` for the three channels acting on both qubits. Phase damping has no
closed form: the uniform relative phase is integrated out analytically and
the remaining (s, r) integral is done by nested adaptive quadrature.
"""
import math

import numpy as np

from ..channels import ChannelKind, check_q
from ..entanglement import D_LIMIT, max_concurrence
from ..errors import DomainError
from ..smallmat import adaptive_quad, elliptic_k

AD_DELTA = (2.0 + math.pi) / 8.0
INNER_TOL = 1e-11
OUTER_TOL = 1e-9
PD_TOL = 1e-8
REL_TOL = 1e-8


def p_c0(c):
    """Initial concurrence density ``3 C sqrt(1 - C^2)`` on [0, 1]."""
    c = np.asarray(c, dtype=float)
    if np.any((c < 0.0) | (c > 1.0)):
        raise DomainError("C must lie in [0, 1]")
    out = 3.0 * c * np.sqrt(np.clip(1.0 - c * c, 0.0, None))
    return float(out) if out.ndim == 0 else out


def cdf_c0(c):
    c = np.clip(np.asarray(c, dtype=float), 0.0, 1.0)
    return 1.0 - (1.0 - c * c) ** 1.5


def joint_pd_sr(s, r):
    """Joint density of the invariants (s, r) on 0 <= r <= s <= 1/2; zero outside.

    ``r`` here is the absolute difference ||psi00 psi11| - |psi01 psi10||.
    The textbook expression ``24 (s^2 - r^2) K(m) / sqrt(1 - 4 r^2)`` is the
    density of the signed difference on |r| <= s; folding it onto r >= 0
    doubles it.
    """
    s = np.asarray(s, dtype=float)
    r = np.asarray(r, dtype=float)
    s_b, r_b = np.broadcast_arrays(s, r)
    inside = (r_b >= 0.0) & (r_b < s_b) & (s_b <= 0.5) & (r_b < 0.5)
    out = np.zeros(s_b.shape)
    if np.any(inside):
        si = s_b[inside]
        ri = r_b[inside]
        den = 1.0 - 4.0 * ri * ri
        m = np.clip((1.0 - 4.0 * si * si) / den, 0.0, np.nextafter(1.0, 0.0))
        out[inside] = 48.0 * (si * si - ri * ri) / np.sqrt(den) * elliptic_k(m)
    return float(out) if out.ndim == 0 else out


def joint_ad(p11, c0):
    """Joint density of (|psi11|^2, C0) over Haar states."""
    p11, c0 = np.broadcast_arrays(np.asarray(p11, dtype=float), np.asarray(c0, dtype=float))
    root = np.sqrt(np.clip(1.0 - c0 * c0, 0.0, None))
    z = np.maximum(1.0 - root, 2.0 * p11)
    inside = (p11 >= 0.0) & (c0 > 0.0) & (c0 <= 1.0) & (2.0 * p11 <= 1.0 + root)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = 3.0 * c0 * np.log((1.0 + root) / z)
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _ad_continuous(q):
    q = np.asarray(q, dtype=float)
    out = np.empty(q.shape)
    small = q < 1e-3
    qs = q[small]
    # series of the two cancelling terms near 0
    out[small] = 4.0 * qs / 3.0 - 12.0 * qs ** 3 / 5.0 + 24.0 * qs ** 5 / 7.0
    qb = q[~small]
    out[~small] = (qb * qb - 1.0) / (2.0 * qb * (1.0 + qb * qb) ** 2) + np.arctan(qb) / (2.0 * qb * qb)
    return out


def _p_qs_d(q):
    u = 1.0 - q
    poly = np.clip((q * q - 2.0 * q + 2.0) * (3.0 * q * q - 6.0 * q + 2.0), 0.0, None)
    return 3.0 * q * (2.0 - q) * np.sqrt(poly) / (4.0 * u ** 7)


def _root_weight_integral(h, lo, hi, r_max, tol):
    """Integrate ``h(r) / sqrt((r^2 - lo) (hi - r^2))`` over the admissible r.

    The range is ``sqrt(max(lo, 0)) <= r <= min(sqrt(hi), r_max)``. Each
    square-root factor is absorbed by a change of variable: ``r = sqrt(-lo)
    sinh(t)`` when ``lo < 0``, a cosine map in ``r^2`` when both roots bound
    the range, and the ``u^2`` substitution otherwise.
    """
    top = math.sqrt(hi)
    r_b = min(top, r_max)
    if lo < 0.0:
        scale = math.sqrt(-lo)
        t_b = math.asinh(r_b / scale)

        def g(t):
            r = scale * np.sinh(t)
            return h(r) / np.sqrt(np.clip(hi - r * r, 1e-300, None))

        return adaptive_quad(g, 0.0, t_b, tol, rel_tol=REL_TOL,
                             singular="right" if r_b == top else None)
    if not r_b * r_b > lo:
        return 0.0
    if r_b == top:
        half = 0.5 * (hi - lo)

        def g(phi):
            r = np.sqrt(lo + half * (1.0 - np.cos(phi)))
            return h(r) / (2.0 * r)

        return adaptive_quad(g, 0.0, math.pi, tol, rel_tol=REL_TOL)

    def g(rho):
        r = np.sqrt(rho)
        w = np.sqrt(np.clip((rho - lo) * (hi - rho), 1e-300, None))
        return h(r) / (2.0 * r * w)

    return adaptive_quad(g, lo, r_b * r_b, tol, rel_tol=REL_TOL, singular="left")


def _pd_qs_inner(s, q, tol):
    u = 1.0 - q
    kappa = (1.0 - u * u) / u
    k2 = kappa * kappa
    lo = s * s * (k2 - 4.0) / k2
    hi = k2 * s * s / (k2 + 4.0)
    pref = 2.0 * (1.0 + 1.0 / (u * u)) / (math.pi * math.sqrt(k2 + 4.0))
    return _root_weight_integral(lambda r: pref * joint_pd_sr(s, r) * (s * s - r * r),
                                 lo, hi, s, tol)


def _p_qs_pd(q, tol=PD_TOL):
    if q == 0.0:
        return 0.0
    return adaptive_quad(lambda s: _pd_qs_inner(s, q, 0.1 * tol), 0.0, 0.5, tol,
                         rel_tol=REL_TOL, vectorized=False)


def p_qs(kind, q_s, tol=PD_TOL):
    """Density of the separation strength over Haar pure states.

    Returns
    -------
    value : float or ndarray
        Continuous part of the density at ``q_s``.
    delta : float
        Weight of the point mass at ``q_s = 1`` (non-zero only for
        amplitude damping, where it holds the asymptotically decaying states).

    Raises
    ------
    DomainError
        Outside the channel's support: [0, 1 - 1/sqrt(3)] for D, (0, 1] for
        AD, [0, 1) for PD.
    """
    kind = ChannelKind.parse(kind)
    q = np.asarray(q_s, dtype=float)
    if kind == ChannelKind.D:
        if np.any((q < 0.0) | (q > D_LIMIT + 1e-15)):
            raise DomainError(f"D separation strength lies in [0, {D_LIMIT:.6f}]")
        val, delta = _p_qs_d(np.minimum(q, D_LIMIT)), 0.0
    elif kind == ChannelKind.AD:
        if np.any((q <= 0.0) | (q > 1.0)):
            raise DomainError("AD separation strength lies in (0, 1]")
        val, delta = _ad_continuous(q), AD_DELTA
    else:
        if np.any((q < 0.0) | (q >= 1.0)):
            raise DomainError("PD separation strength lies in [0, 1)")
        val = np.array([_p_qs_pd(float(x), tol) for x in q.ravel()]).reshape(q.shape)
        delta = 0.0
    val = np.asarray(val, dtype=float)
    return (float(val) if val.ndim == 0 else val), delta


def _p_c_d(c, q):
    u2 = (1.0 - q) ** 2
    c0 = (c + 0.5 * q * (2.0 - q)) / u2
    return np.where(c0 <= 1.0, p_c0(np.clip(c0, 0.0, 1.0)) / u2, 0.0)


def _ad_breaks(cs, q):
    """Points in p11 where the AD joint density changes branch."""
    pts = [0.0]
    a = 4.0 * (1.0 + q * q)
    b = 4.0 * (cs * q - 1.0)
    disc = b * b - 4.0 * a * cs * cs
    if disc > 0.0:
        root = math.sqrt(disc)
        pts += [(-b - root) / (2.0 * a), (-b + root) / (2.0 * a)]
    if q > 0.0:
        pts.append((1.0 - cs) / (2.0 * q))
    top = min(1.0, (1.0 - cs) / (2.0 * q)) if q > 0.0 else 1.0
    return sorted({min(max(p, 0.0), top) for p in pts} | {top})


def _p_c_ad(c, q, tol):
    u = 1.0 - q
    cs = c / u
    if cs > 1.0:
        return 0.0
    if q == 0.0:
        return p_c0(cs)
    f = lambda p: joint_ad(p, np.minimum(cs + 2.0 * p * q, 1.0))
    pts = _ad_breaks(cs, q)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b > a:
            total += adaptive_quad(f, a, b, tol)
    return total / u


def _pd_c_inner(s, c, qt, tol):
    e = c + qt * s
    lo = (e * e - 4.0 * s * s * (1.0 - qt)) / (qt * qt)
    hi = e * e / (2.0 - qt) ** 2
    if not min(hi, s * s) > max(lo, 0.0):
        return 0.0
    pref = 2.0 * e / (math.pi * qt * (2.0 - qt))
    return _root_weight_integral(lambda r: pref * joint_pd_sr(s, r), lo, hi, s, tol)


def _p_c_pd(c, q, tol):
    qt = q * (2.0 - q)
    if qt == 0.0:
        return p_c0(c)
    if c <= 0.0:
        c = 0.0
    s_min = c / (2.0 * (1.0 - qt))
    if s_min >= 0.5:
        return 0.0
    pts = [s_min]
    kink_den = 2.0 * math.sqrt(1.0 - qt) - qt
    if kink_den > 0.0:
        s_k = c / kink_den
        if s_min < s_k < 0.5:
            pts.append(s_k)
    pts.append(0.5)
    # square-root onset at s_min, logarithmic peak at the kink
    flags = ["both", "left"] if len(pts) == 3 else ["left"]
    total = 0.0
    for (a, b), flag in zip(zip(pts[:-1], pts[1:]), flags):
        total += adaptive_quad(lambda s: _pd_c_inner(s, c, qt, 0.1 * tol), a, b, tol,
                               rel_tol=REL_TOL, singular=flag, vectorized=False)
    return total


def p_c(kind, c, q, tol=None):
    """Density of the evolved concurrence on (0, C_M(q)] (continuous part).

    ``tol`` is the absolute quadrature tolerance (AD and PD only); the
    defaults are 1e-9 for AD and 1e-8 for PD.

    The separable fraction ``S(q)`` sits at ``C = 0`` as a point mass and is
    not included. Values above the maximum concurrence give 0.
    """
    kind = ChannelKind.parse(kind)
    q = float(check_q(q))
    if q >= 1.0:
        raise DomainError("concurrence density needs q < 1")
    c_arr = np.asarray(c, dtype=float)
    if np.any(c_arr < 0.0):
        raise DomainError("C must be non-negative")
    cm = max_concurrence(kind, q)
    if kind == ChannelKind.D:
        out = np.where(c_arr <= cm, _p_c_d(c_arr, q), 0.0)
    else:
        fn = _p_c_ad if kind == ChannelKind.AD else _p_c_pd
        if tol is None:
            tol = OUTER_TOL if kind == ChannelKind.AD else PD_TOL
        flat = [fn(float(x), q, tol) if x <= cm else 0.0 for x in c_arr.ravel()]
        out = np.array(flat).reshape(c_arr.shape)
    return float(out) if out.ndim == 0 else out


def survival(kind, q, tol=None):
    """Entangled fraction ``1 - S(q) = integral of p_c over (0, C_M]``.

    Default tolerances: 1e-12 (D), 1e-10 (AD), 1e-6 (PD).
    """
    kind = ChannelKind.parse(kind)
    q = float(check_q(q))
    if q == 0.0:
        return 1.0
    if q >= 1.0:
        return AD_DELTA if kind == ChannelKind.AD else 0.0
    cm = max_concurrence(kind, q)
    if cm <= 0.0:
        return 0.0
    if tol is None:
        tol = {ChannelKind.D: 1e-12, ChannelKind.AD: 1e-10, ChannelKind.PD: 1e-6}[kind]
    if kind == ChannelKind.D:
        return adaptive_quad(lambda c: _p_c_d(c, q), 0.0, cm, tol, singular="right")
    if kind == ChannelKind.AD:
        return adaptive_quad(lambda c: _p_c_ad(c, q, 0.01 * tol), 0.0, cm, tol,
                             vectorized=False, singular="both")
    return adaptive_quad(lambda c: _p_c_pd(c, q, 0.1 * tol), 0.0, cm, tol,
                         rel_tol=REL_TOL, vectorized=False, singular="both")


PD_PEAK = 2.0 - math.sqrt(2.0)


def _cdf_qs_pd_inner(s, kappa, tol):
    k2 = kappa * kappa
    lo = s * s * (k2 - 4.0) / k2
    hi = k2 * s * s / (k2 + 4.0)
    total = 0.0
    r_lo = math.sqrt(lo) if lo > 0.0 else 0.0
    if r_lo > 0.0:
        # every phase separates before q here
        total += adaptive_quad(lambda r: joint_pd_sr(s, r), 0.0, r_lo, tol, rel_tol=REL_TOL)

    def frac(r):
        rho = r * r
        x = 0.5 * k2 - (s * s + rho) / (s * s - rho)
        return joint_pd_sr(s, r) * (1.0 - np.arccos(np.clip(x, -1.0, 1.0)) / math.pi)

    total += adaptive_quad(frac, r_lo, math.sqrt(hi), tol, rel_tol=REL_TOL, singular="both")
    return total


def cdf_qs(kind, q, tol=1e-9):
    """Probability that a Haar state separates at strength <= ``q``.

    For AD the point mass at 1 is included only at ``q = 1``. The PD value
    integrates the fraction of relative phases with ``q_S <= q`` over
    (s, r), which keeps the integrand bounded.
    """
    kind = ChannelKind.parse(kind)
    q = float(check_q(q))
    if kind == ChannelKind.D:
        if q >= D_LIMIT:
            return 1.0
        c_star = q * (2.0 - q) / (2.0 * (1.0 - q) ** 2)
        return float(cdf_c0(c_star))
    if kind == ChannelKind.AD:
        if q == 0.0:
            return 0.0
        cont = adaptive_quad(lambda x: _ad_continuous(x), 0.0, q, tol)
        return cont + (AD_DELTA if q == 1.0 else 0.0)
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    u = 1.0 - q
    kappa = (1.0 - u * u) / u
    val = adaptive_quad(lambda s: _cdf_qs_pd_inner(s, kappa, 0.1 * tol), 0.0, 0.5, tol,
                        rel_tol=REL_TOL, vectorized=False)
    return min(max(val, 0.0), 1.0)


def qs_domain(kind):
    kind = ChannelKind.parse(kind)
    return (0.0, D_LIMIT) if kind == ChannelKind.D else (0.0, 1.0)


def p_qs_grid(kind, grid):
    """``p_qs`` on a grid that may touch the support ends, where the limits are 0
    (and pi/8 for AD at q_S = 1)."""
    kind = ChannelKind.parse(kind)
    grid = np.asarray(grid, dtype=float)
    out = np.zeros(grid.shape)
    lo, hi = qs_domain(kind)
    inner = (grid > lo) & (grid < hi)
    if kind == ChannelKind.AD:
        inner = (grid > 0.0) & (grid <= 1.0)
    if np.any(inner):
        out[inner] = p_qs(kind, grid[inner])[0]
    return out


def density_from_survival(survival_fn, grid, domain, step=1e-4):
    """``-d/dq`` of a survival function by central differences.

    The step shrinks near the ends of ``domain`` so that every abscissa
    stays inside it; points on an end use a one-sided difference.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise DomainError("need at least 3 grid points")
    if np.any(np.diff(grid) <= 0.0):
        raise DomainError("grid must be ascending")
    lo, hi = domain
    if grid[0] < lo or grid[-1] > hi:
        raise DomainError(f"grid leaves the domain [{lo}, {hi}]")
    out = np.empty(grid.size)
    for i, x in enumerate(grid):
        h = min(step, 0.25 * (x - lo), 0.25 * (hi - x))
        if h > 0.0:
            out[i] = -(survival_fn(x + h) - survival_fn(x - h)) / (2.0 * h)
        elif x == lo:
            out[i] = -(survival_fn(x + step) - survival_fn(x)) / step
        else:
            out[i] = -(survival_fn(x) - survival_fn(x - step)) / step
    return out


def esd_density_from_concurrence(kind, grid, step=1e-4):
    """Separation-strength density recovered as ``-d/dq`` of the entangled fraction.

    The entangled fraction at each abscissa is the integral of
    :func:`p_c` over (0, C_M(q)]; for AD the mass left at q = 1 becomes the
    point mass.
    """
    from .curves import DensityCurve

    kind = ChannelKind.parse(kind)
    domain = qs_domain(kind)
    upper = domain[1] if kind != ChannelKind.AD else 1.0 - 1e-12
    vals = density_from_survival(lambda x: survival(kind, min(x, upper)), grid, domain, step)
    vals = np.where(vals < 0.0, 0.0, vals)
    masses = [(1.0, survival(kind, 1.0))] if kind == ChannelKind.AD else []
    return DensityCurve(grid, vals, masses, domain,
                        {"kind": kind.name, "source": "concurrence"})


def analytic_esd_curve(kind, points=512, with_cdf=True, tol=1e-8):
    """Tabulated separation-strength density, with exact CDF values if requested."""
    from .curves import DensityCurve

    kind = ChannelKind.parse(kind)
    domain = qs_domain(kind)
    grid = np.linspace(domain[0], domain[1], points)
    vals = p_qs_grid(kind, grid)
    masses = [(1.0, AD_DELTA)] if kind == ChannelKind.AD else []
    cdf = None
    if with_cdf:
        cdf = np.array([cdf_qs(kind, x, tol) for x in grid])
        if kind == ChannelKind.AD:
            cdf[-1] -= AD_DELTA
    return DensityCurve(grid, vals, masses, domain, {"kind": kind.name, "source": "analytic"},
                        cdf_values=cdf)


def analytic_conc_curve(kind, q, points=512):
    """Concurrence density at strength ``q``; the separable fraction is a mass at 0."""
    from .curves import DensityCurve

    kind = ChannelKind.parse(kind)
    cm = max_concurrence(kind, q)
    if cm <= 0.0:
        return DensityCurve(np.array([]), np.array([]), [(0.0, 1.0)], (0.0, 1.0),
                            {"kind": kind.name, "q": repr(float(q))})
    grid = np.linspace(0.0, cm, points)
    vals = p_c(kind, grid, q)
    sep = max(1.0 - survival(kind, q), 0.0)
    masses = [(0.0, sep)] if sep > 0.0 else []
    return DensityCurve(grid, vals, masses, (0.0, 1.0),
                        {"kind": kind.name, "q": repr(float(q))})
