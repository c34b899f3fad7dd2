"""Phase diffusion of a single interacting Bose mode: Bogoliubov, HFB and
extended-HFB approximations checked against exact truncated-Fock dynamics."""

from .model import (
    MeanField,
    ModelParams,
    MomentState,
    QuadratureStats,
    TwoModeParams,
    coherent_gamma_moments,
    gamma_to_quadratures,
    reduce_two_mode,
    translated_coefficients,
)
from .solvers import solve_bogoliubov_nu, solve_extended, solve_hfb

__all__ = [
    "MeanField",
    "ModelParams",
    "MomentState",
    "QuadratureStats",
    "TwoModeParams",
    "coherent_gamma_moments",
    "gamma_to_quadratures",
    "reduce_two_mode",
    "translated_coefficients",
    "solve_bogoliubov_nu",
    "solve_extended",
    "solve_hfb",
]
