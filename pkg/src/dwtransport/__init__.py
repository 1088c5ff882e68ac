"""Simulation and optimal control of atom transport in a double-well optical lattice."""

from .grid import (
    DEFAULT_DOMAIN,
    SpatialGrid,
    WaveFn1D,
    WaveFn2D,
    default_grid,
    inner_product,
    inner_product_2d,
    make_grid,
)
from .potential import LatticeParams, WellGeometry, potential_1d, potential_2d, potential_gradient, well_geometry
from .sequences import (
    ControlSequence,
    WaveformSpectrum,
    fourier_spectrum,
    load_sequence,
    lowpass_filter,
    make_constant,
    make_linear_merge,
    sample,
    save_sequence,
)
from .spectrum import (
    EigenPair,
    TridiagonalOperator,
    assemble_hamiltonian,
    instantaneous_spectrum,
    localized_states,
    lowest_eigenstates,
)
from .propagate1d import PropagationResult, cn_step, evolve
from .propagate2d import (
    InteractionParams,
    TwoParticleResult,
    TwoParticleState,
    build_two_particle_hamiltonian,
    evolve_two_particle,
    pr_step,
    two_particle_eigenstate,
)
from .krotov import ControlProblem, Objective, OptimizationTrace, optimize, optimize_with_interactions
from .analysis import (
    FidelityReport,
    ProjectionTrace,
    ScanResult,
    populations,
    projection_trace,
    rms_deviation,
    scan_duration,
    scan_theta,
    two_particle_fidelity,
)
from .units import KINETIC_COEFF_KHZ, RECOIL_KHZ, UNITS, UnitSystem

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_DOMAIN",
    "SpatialGrid",
    "WaveFn1D",
    "WaveFn2D",
    "default_grid",
    "inner_product",
    "inner_product_2d",
    "make_grid",
    "LatticeParams",
    "WellGeometry",
    "potential_1d",
    "potential_2d",
    "potential_gradient",
    "well_geometry",
    "ControlSequence",
    "WaveformSpectrum",
    "fourier_spectrum",
    "load_sequence",
    "lowpass_filter",
    "make_constant",
    "make_linear_merge",
    "sample",
    "save_sequence",
    "EigenPair",
    "TridiagonalOperator",
    "assemble_hamiltonian",
    "instantaneous_spectrum",
    "localized_states",
    "lowest_eigenstates",
    "PropagationResult",
    "cn_step",
    "evolve",
    "InteractionParams",
    "TwoParticleResult",
    "TwoParticleState",
    "build_two_particle_hamiltonian",
    "evolve_two_particle",
    "pr_step",
    "two_particle_eigenstate",
    "ControlProblem",
    "Objective",
    "OptimizationTrace",
    "optimize",
    "optimize_with_interactions",
    "FidelityReport",
    "ProjectionTrace",
    "ScanResult",
    "populations",
    "projection_trace",
    "rms_deviation",
    "scan_duration",
    "scan_theta",
    "two_particle_fidelity",
    "KINETIC_COEFF_KHZ",
    "RECOIL_KHZ",
    "UNITS",
    "UnitSystem",
]
