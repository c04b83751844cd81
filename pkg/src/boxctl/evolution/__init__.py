"""Galerkin time evolution of the gauge-transformed moving-rectangle equation."""

from .basis import (
    SymmetryBreaker,
    WaveState,
    cosine_matrix,
    gauge_matrix,
    linear_moment_matrix,
    quadratic_moment_matrix,
)
from .propagator import assemble_hamiltonian, axis_hamiltonian, propagate, tail_population
from .protocols import (
    PumpingResult,
    SplitResult,
    SweepResult,
    adiabatic_sweep,
    default_breaker_strength,
    eigenbasis_populations,
    find_split_speed,
    gap_scale,
    gauge_to_physical,
    physical_amplitudes,
    run_pumping,
    state_from_physical,
)

__all__ = [
    "SymmetryBreaker",
    "WaveState",
    "cosine_matrix",
    "gauge_matrix",
    "linear_moment_matrix",
    "quadratic_moment_matrix",
    "assemble_hamiltonian",
    "axis_hamiltonian",
    "propagate",
    "tail_population",
    "PumpingResult",
    "SplitResult",
    "SweepResult",
    "adiabatic_sweep",
    "default_breaker_strength",
    "eigenbasis_populations",
    "find_split_speed",
    "gap_scale",
    "gauge_to_physical",
    "physical_amplitudes",
    "run_pumping",
    "state_from_physical",
]
