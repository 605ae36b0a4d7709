"""Kicked Harper and double-kicked rotor simulations on the momentum lattice."""

from .analysis import (BALLISTIC, DIFFUSIVE, LOCALIZED, SUBDIFFUSIVE,
                       TRANSPORT_LABELS, BoxCountResult, PowerLawFit,
                       box_counting_dimension, classify_transport,
                       fit_power_law, hausdorff_from_alpha,
                       spectrum_set_distance)
from .classical import (PhasePoint, canonical_transform,
                        canonical_transform_inverse, circular_distance,
                        dkrm_half_steps, dkrm_jacobian, dkrm_resonant_map,
                        equivalence_residual, khm_jacobian, khm_map,
                        trajectory)
from .errors import (ConfigError, LatticeOverflowError, NumericalError,
                     ResourceLimitError)
from .lattice import (DKRM_GENERAL, DKRM_RESONANT, KHM, MODEL_KINDS,
                      EffPlanck, LabParams, ModelSpec, Rational, Wavepacket,
                      best_rational_approx, edge_mass, farey_sequence,
                      momentum_variance, parse_effective_planck,
                      reduce_rational)
from .quantum import (DiffusionSeries, HarperPhase, KickCoefficients,
                      KickFactor, QuadraticPhase, apply_floquet, apply_kick,
                      apply_quadratic_phase, evolve, floquet_factors,
                      kick_coefficients)
from .spectrum import (BlochMatrix, SpectrumSet, SpectrumSlice,
                       SymmetryReport, aggregated_energies, build_bloch_matrix,
                       butterfly_scan, check_symmetry_claims, lattice_period,
                       model_from_ratios, model_spectrum, quasienergies,
                       scan_rationals, theta_grid)

__version__ = "0.1.0"
