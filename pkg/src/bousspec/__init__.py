"""Pseudo-spectral Boussinesq solver with fractional dissipation and harmonic-analysis diagnostics."""

from .boussinesq import (
    BlowUpError,
    BoussinesqParams,
    DiagnosticsConfig,
    SimState,
    gamma,
    gamma_residual,
    initial_state,
    run,
    step,
    twin_run,
)
from .initial_data import make_initial, random_field
from .littlewood_paley import BesovSpec, SpaceTimeSpec, besov_norm, block, build_partition, low_pass
from .region import RegionQuery, pi_contains, pi_r_contains
from .spectral import MultiplierSpec, apply_multiplier, forward_transform, get_grid, inverse_transform
from .transport_diffusion import TDProblem, solve_td

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "BoussinesqParams",
    "DiagnosticsConfig",
    "SimState",
    "gamma",
    "gamma_residual",
    "initial_state",
    "run",
    "step",
    "twin_run",
    "make_initial",
    "random_field",
    "BesovSpec",
    "SpaceTimeSpec",
    "besov_norm",
    "block",
    "build_partition",
    "low_pass",
    "RegionQuery",
    "pi_contains",
    "pi_r_contains",
    "MultiplierSpec",
    "apply_multiplier",
    "forward_transform",
    "get_grid",
    "inverse_transform",
    "TDProblem",
    "solve_td",
]
