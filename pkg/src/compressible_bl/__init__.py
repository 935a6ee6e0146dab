"""Velocity profiles of a stationary compressible boundary layer under the no-back-flow condition."""

from .core import (
    DomainSpec,
    FactorDomainError,
    FlowParams,
    ParameterError,
    ProfileTable,
    SpeedExceedsEnergyBound,
    nonlinear_factor,
    validate_params,
    viscosity_ratio,
)
from .exact_solver import (
    BeyondSaturation,
    antiderivative_F,
    exact_profile,
    invert_profile,
    solve_ode,
    verify_reduction,
)
from .pohlhausen import (
    lambda_of,
    picard_step,
    quartic_coeffs,
    theorem1_literal,
    theorem1_recomputed,
)
from .series import binomial_coeffs, eval_series, explog_coeffs, paper_literal_coeffs

__version__ = "0.1.0"

__all__ = [
    "BeyondSaturation",
    "DomainSpec",
    "FactorDomainError",
    "FlowParams",
    "ParameterError",
    "ProfileTable",
    "SpeedExceedsEnergyBound",
    "antiderivative_F",
    "binomial_coeffs",
    "eval_series",
    "exact_profile",
    "explog_coeffs",
    "invert_profile",
    "lambda_of",
    "nonlinear_factor",
    "paper_literal_coeffs",
    "picard_step",
    "quartic_coeffs",
    "solve_ode",
    "theorem1_literal",
    "theorem1_recomputed",
    "validate_params",
    "verify_reduction",
    "viscosity_ratio",
]
