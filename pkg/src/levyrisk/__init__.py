"""Entropic value-at-risk and Euler capital allocation for Levy insurance models."""

from .allocation import (
    AllocationReport,
    FactorPortfolio,
    allocate,
    brownian_allocation,
    brownian_contributions,
    brownian_s_star,
    directional_derivative_check,
    diversification_check,
    euler_contributions,
    solve_s_star,
    stable_allocation,
    stable_contributions,
)
from .cevar import CevarQuery, WeightFunction, cevar, evar_curve
from .errors import (
    ConfigError,
    DomainError,
    LevyRiskError,
    NoStationaryPointError,
    QuadratureBudgetError,
)
from .evar import (
    EvarQuery,
    EvarResult,
    dual_feasibility_check,
    evar,
    evar_closed_form_brownian,
    evar_objective,
)
from .factors import (
    AlphaStableSubordinator,
    BrownianWithDrift,
    CompoundPoissonExp,
    FactorCombination,
    GammaSubordinator,
    LevyFactor,
    combine,
    combine_deriv,
    factor_from_dict,
    laplace_exponent,
    laplace_exponent_deriv,
)
from .montecarlo import (
    RuinEstimate,
    SimulationConfig,
    adjustment_coefficient,
    empirical_evar,
    empirical_exponent_check,
    ruin_probability,
    sample_increments,
    validation_report,
    var_inf_bound_check,
)

__version__ = "0.1.0"
