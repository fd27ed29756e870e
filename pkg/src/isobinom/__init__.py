"""Order-restricted tests of homogeneity against increasing binomial proportions."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    IsotonicSample,
    cell_probs,
    design_matrices,
    fisher_info,
    fisher_info_null,
    pi_from_theta,
    theta_from_pi,
    validate_sample,
)
from .estimate import EstimateTriple, estimate_all, expand_loglinear, pava  # noqa: E402
from .divergence import divergence_generic, power_divergence  # noqa: E402
from .stats import StatValue, compute_statistics, stat_S, stat_T, wald_D, wald_H, wald_W  # noqa: E402
from .chibar import (  # noqa: E402
    ChiBarDistribution,
    ConeMetric,
    chi_bar,
    chibar_pvalue,
    chisq_sf,
    cone_covariance,
    correlations,
    metric_from_matrix,
    partial_correlations,
    project_cone,
    weights_closed_form,
    weights_monte_carlo,
)
from .sim import Scenario, SimResult, run_scenario, scenario_catalog  # noqa: E402
