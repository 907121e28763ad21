"""Quench dynamics of the disordered toric code, row by row.

The 2D toric code with row fields reduces exactly to independent disordered
transverse-field Ising chains.  This package evolves those chains with exact
free-fermion (Bogoliubov) methods, measures Wilson-loop string correlators
and interval entanglement entropies, probes the propagator lightcone for
dynamical localization, and validates everything against a dense many-body
oracle on short chains.
"""

__version__ = "0.1.0"

from .chains import (
    BdGMatrix,
    ChainCouplings,
    LightconeProfile,
    LocalizationFit,
    SpectralData,
    build_bdg,
    default_time_grid,
    diagonalize,
    distance_profile,
    fit_localization,
    lightcone_profile,
    propagator,
)
from .ensemble import (
    EnsemblePoint,
    EnsembleResult,
    ExperimentConfig,
    average,
    run_experiment,
)
from .lattice import (
    CylinderRegion,
    DisorderRealization,
    LatticeConfig,
    SquareRegion,
    assemble_entropy,
    assemble_wilson,
    build_disorder_realization,
    cylinder_entropy_jobs,
    wilson_loop_jobs,
)
from .observables import (
    EntropySpectrum,
    MajoranaGamma,
    StringGamma,
    binary_entropy,
    build_majorana_gamma,
    build_string_gamma,
    interval_entropy,
    string_correlator,
)
from .quench import EvolvedFrame, QuenchPair, evolve_coefficients, two_point, two_point_block

__all__ = [
    "BdGMatrix",
    "ChainCouplings",
    "CylinderRegion",
    "DisorderRealization",
    "EnsemblePoint",
    "EnsembleResult",
    "EntropySpectrum",
    "EvolvedFrame",
    "ExperimentConfig",
    "LatticeConfig",
    "LightconeProfile",
    "LocalizationFit",
    "MajoranaGamma",
    "QuenchPair",
    "SpectralData",
    "SquareRegion",
    "StringGamma",
    "assemble_entropy",
    "assemble_wilson",
    "average",
    "binary_entropy",
    "build_bdg",
    "build_disorder_realization",
    "build_majorana_gamma",
    "build_string_gamma",
    "cylinder_entropy_jobs",
    "default_time_grid",
    "diagonalize",
    "distance_profile",
    "evolve_coefficients",
    "fit_localization",
    "interval_entropy",
    "lightcone_profile",
    "propagator",
    "run_experiment",
    "string_correlator",
    "two_point",
    "two_point_block",
    "wilson_loop_jobs",
]
