import json
import math

import numpy as np
import pytest
from scipy import integrate, stats

from entdecay.channels import SideSpec
from entdecay.entanglement import D_LIMIT, max_concurrence
from entdecay.ensembles import (
    AD_DELTA, PD_PEAK, DensityCurve, EnsembleStats, analytic_conc_curve, analytic_esd_curve,
    cdf_c0, cdf_qs, empirical_density, ensemble_stats, esd_density_from_concurrence,
    esd_outcomes, evolved_concurrences, joint_ad, joint_pd_sr, ks_distance, mc_concurrence,
    mc_esd, mc_initial_concurrence, mc_stats, mixed_scaling_fit, p_c, p_c0, p_qs, p_qs_grid,
    sample_states, survival,
)
from entdecay.ensembles.montecarlo import block_sizes, parse_measure
from entdecay.errors import DomainError, FitError


def quad(f, a, b, points=None):
    val, err = integrate.quad(f, a, b, points=points, limit=400, epsabs=1e-11, epsrel=1e-10)
    return val


def test_initial_concurrence_density():
    assert math.isclose(quad(p_c0, 0, 1), 1.0, abs_tol=1e-10)
    assert math.isclose(quad(lambda c: c * p_c0(c), 0, 1), 3 * math.pi / 16, abs_tol=1e-10)
    assert math.isclose(cdf_c0(0.5), quad(p_c0, 0, 0.5), abs_tol=1e-12)


def test_joint_densities_normalised():
    # folded (s, r) density on 0 <= r <= s <= 1/2
    tot, _ = integrate.dblquad(lambda r, s: joint_pd_sr(s, r), 0, 0.5, 0, lambda s: s,
                               epsabs=1e-9, epsrel=1e-9)
    assert math.isclose(tot, 1.0, abs_tol=1e-6)
    # (p11, C0) density, supported on 2 p11 <= 1 + sqrt(1 - C0^2)
    tot, _ = integrate.dblquad(lambda p, c: joint_ad(p, c), 0, 1, 0,
                               lambda c: 0.5 * (1 + math.sqrt(1 - c * c)), epsabs=1e-10)
    assert math.isclose(tot, 1.0, abs_tol=1e-6)
    # its C0 marginal is the Haar concurrence density
    for c in (0.2, 0.5, 0.9):
        marg = quad(lambda p: joint_ad(p, c), 0, 0.5 * (1 + math.sqrt(1 - c * c)),
                    points=[0.5 * (1 - math.sqrt(1 - c * c))])
        assert math.isclose(marg, p_c0(c), rel_tol=1e-8)


def test_esd_density_normalisations():
    d = quad(lambda x: p_qs("D", x)[0], 0, D_LIMIT)
    assert math.isclose(d, 1.0, abs_tol=1e-8)
    ad = quad(lambda x: p_qs("AD", x)[0], 0, 1)
    assert math.isclose(ad, (6 - math.pi) / 8, abs_tol=1e-8)
    assert p_qs("AD", 0.5)[1] == AD_DELTA == (2 + math.pi) / 8


def test_cdf_matches_density():
    for kind, x in (("D", 0.2), ("D", 0.4), ("AD", 0.3), ("AD", 0.9)):
        assert math.isclose(cdf_qs(kind, x), quad(lambda t: p_qs(kind, t)[0], 0, x), abs_tol=1e-8)
    assert cdf_qs("AD", 1.0) == 1.0
    assert math.isclose(cdf_qs("PD", PD_PEAK, tol=1e-8),
                        quad(lambda t: p_qs("PD", t, tol=1e-9)[0], 0, PD_PEAK), abs_tol=1e-5)


@pytest.mark.parametrize("kind,q", [("D", 0.1), ("D", 0.3), ("AD", 0.3), ("AD", 0.7)])
def test_concurrence_density_integrates_to_survival(kind, q):
    cm = float(max_concurrence(kind, q))
    tot = quad(lambda c: p_c(kind, c, q), 0, cm, points=[cm / 2])
    assert math.isclose(tot, survival(kind, q), abs_tol=2e-6)


@pytest.mark.slow
def test_pd_density_against_monte_carlo():
    q = 0.3
    c = mc_concurrence("PD", [q], n=200_000, seed=6)[:, 0]
    surv = survival("PD", q, tol=1e-6)
    assert abs(np.mean(c > 1e-12) - surv) < 4 * math.sqrt(surv * (1 - surv) / c.size)
    grid = np.linspace(0.01, 0.45, 12)
    hist, edges = np.histogram(c[c > 1e-12], bins=60, range=(0, float(max_concurrence("PD", q))))
    centres = 0.5 * (edges[1:] + edges[:-1])
    emp = np.interp(grid, centres, hist / (c.size * (edges[1] - edges[0])))
    assert np.allclose(p_c("PD", grid, q), emp, atol=0.08)


def test_survival_limits():
    for kind in ("D", "AD", "PD"):
        assert math.isclose(survival(kind, 0.0), 1.0, abs_tol=1e-9)
    assert survival("D", D_LIMIT) == pytest.approx(0.0, abs=1e-12)
    assert survival("AD", 1.0) == AD_DELTA


def test_p_c_against_monte_carlo():
    q = 0.3
    c = mc_concurrence("AD", [q], n=200_000, seed=4)[:, 0]
    curve = analytic_conc_curve("AD", q, points=400)
    assert ks_distance(c, curve.cdf) < 0.01


def test_consistency_identity_d():
    grid = (np.arange(32) + 0.5) / 32 * D_LIMIT
    rec = esd_density_from_concurrence("D", grid)
    assert np.max(np.abs(rec.values - p_qs_grid("D", grid))) < 1e-3


def test_density_curve_roundtrip(tmp_path):
    curve = DensityCurve(np.linspace(0, 1, 5), [0, 1, 2, 1, 0], [(1.0, 0.25)],
                         meta={"kind": "AD"})
    text = curve.to_csv(tmp_path / "c.csv")
    back = DensityCurve.from_csv(text)
    assert np.array_equal(back.grid, curve.grid) and np.array_equal(back.values, curve.values)
    assert back.masses == curve.masses and back.meta == {"kind": "AD"}
    again = DensityCurve.from_json(curve.to_json())
    assert again.masses == curve.masses and again.domain == curve.domain
    assert json.loads(curve.to_json())["masses"] == [[1.0, 0.25]]
    assert math.isclose(curve.total_mass(), 1.25)
    assert curve.cdf(1.0) == pytest.approx(1.25)
    assert curve.argmax() == 0.5


def test_density_curve_validation():
    with pytest.raises(DomainError):
        DensityCurve([0, 1], [1.0])
    with pytest.raises(DomainError):
        DensityCurve([1, 0], [1.0, 1.0])
    with pytest.raises(DomainError):
        DensityCurve([0, 1], [-1.0, 1.0])
    with pytest.raises(DomainError):
        DensityCurve([0, 1], [1.0, 1.0], [(0.5, 2.0)])


def test_empirical_density():
    x = np.random.default_rng(0).uniform(size=10_000)
    cens = x > 0.9
    cur = empirical_density(x, 10, (0, 1), censored=cens)
    assert math.isclose(cur.values.sum() * 0.1 + cur.mass_weight, 1.0, abs_tol=1e-12)
    assert cur.masses[0][0] == 1.0 and math.isclose(cur.masses[0][1], cens.mean())
    point = empirical_density(np.full(5, 0.3), 4)
    assert point.masses == [(0.3, 1.0)]
    for bad in (dict(samples=[], bins=5), dict(samples=[0.1, 0.2], bins=1)):
        with pytest.raises(DomainError):
            empirical_density(**bad)


def test_ks_distance_matches_scipy():
    x = np.random.default_rng(1).uniform(size=2000)
    ours = ks_distance(x, lambda t: np.clip(t, 0, 1))
    assert math.isclose(ours, stats.kstest(x, "uniform").statistic, rel_tol=1e-12)
    # ties against a step CDF
    assert ks_distance(np.zeros(10), lambda t: (t >= 0).astype(float)) == 0.0


def test_scaling_fit_recovers_alpha():
    g = np.linspace(0, 1, 801)
    base = np.where(g < 0.5, np.sin(2 * np.pi * g) ** 2 * 4, 0.0)
    b = DensityCurve(g, base)
    alpha = 1.56
    a = DensityCurve(g, np.interp(g / alpha, g, base) / alpha)
    assert abs(mixed_scaling_fit(a, b) - alpha) < 1e-3
    with pytest.raises(FitError):
        mixed_scaling_fit(DensityCurve([], [], [(0.0, 1.0)]), b)


def test_stats_object():
    s = EnsembleStats.from_sums(10.0, 30.0, 2, 0.9, 10)
    assert s.mean == 1.0 and math.isclose(s.std, math.sqrt(2.0))
    assert s.separable_fraction == 0.2
    with pytest.raises(DomainError):
        EnsembleStats(0.1, -1.0, 0.5, 0.3, 10)


def test_block_layout_and_measures():
    assert block_sizes(5, 2) == [2, 2, 1]
    assert parse_measure("HSMixed") == "hs" and parse_measure("Bures") == "bures"
    with pytest.raises(DomainError):
        parse_measure("uniform")
    with pytest.raises(DomainError):
        block_sizes(0)


def test_worker_invariance():
    kw = dict(measure="haar", n=5000, seed=3, block=1024)
    one = mc_stats("PD", [0.2, 0.6], workers=1, **kw)
    three = mc_stats("PD", [0.2, 0.6], workers=3, **kw)
    assert one == three
    a = mc_esd("AD", measure="hs", n=600, seed=2, block=256, workers=1, method="numeric")
    b = mc_esd("AD", measure="hs", n=600, seed=2, block=256, workers=2, method="numeric")
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1], equal_nan=True)


def test_stats_agree_with_direct_computation():
    states = sample_states("haar", 9, 3000, block=1000)
    direct = ensemble_stats("D", 0.2, states)
    merged = mc_stats("D", [0.2], n=3000, seed=9, block=1000)[0]
    assert math.isclose(direct.mean, merged.mean, rel_tol=1e-12)
    assert math.isclose(direct.std, merged.std, rel_tol=1e-9)
    assert direct.separable_fraction == merged.separable_fraction


def test_pure_state_routes_agree():
    states = sample_states("haar", 5, 300)
    for kind in ("D", "AD", "PD"):
        for side in (SideSpec.BOTH, SideSpec.FIRST):
            fast = evolved_concurrences(states, kind, side, [0.2, 0.5])
            slow = evolved_concurrences(np.einsum("ni,nj->nij", states, states.conj()), kind,
                                        side, [0.2, 0.5])
            assert np.allclose(fast, slow, atol=1e-10)
        a = esd_outcomes(states, kind, method="analytic")
        n = esd_outcomes(states, kind, method="numeric")
        assert np.array_equal(a[0], n[0])
    with pytest.raises(DomainError):
        esd_outcomes(sample_states("hs", 1, 4), "D", method="analytic")


def test_initial_concurrence_sampler():
    c = mc_initial_concurrence(n=100_000, seed=8)
    assert abs(c.mean() - 3 * math.pi / 16) < 3e-3


def test_analytic_esd_curve_shapes():
    d = analytic_esd_curve("D", points=129)
    assert d.domain == (0.0, D_LIMIT) and d.is_normalized(1e-6)
    ad = analytic_esd_curve("AD", points=65)
    assert ad.masses == [(1.0, AD_DELTA)] and ad.is_normalized(1e-6)
