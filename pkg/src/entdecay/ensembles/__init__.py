"""Probability densities over state ensembles: closed forms, quadratures and Monte Carlo."""
from .analytic import (
    AD_DELTA, PD_PEAK, analytic_conc_curve, analytic_esd_curve, cdf_c0, cdf_qs,
    density_from_survival, esd_density_from_concurrence, joint_ad, joint_pd_sr, p_c, p_c0,
    p_qs, p_qs_grid, qs_domain, survival,
)
from .curves import (
    DensityCurve, EnsembleStats, empirical_density, ks_distance, mixed_scaling_fit,
)
from .montecarlo import (
    ensemble_stats, esd_outcomes, evolved_concurrences, initial_concurrences, map_blocks,
    mc_concurrence, mc_esd, mc_initial_concurrence, mc_stats, sample_states,
)
