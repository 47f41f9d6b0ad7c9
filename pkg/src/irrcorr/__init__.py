"""Irreducible k-particle correlations of n-qubit states.

Numeric maximum-entropy ladders, a depolarization-based continuity
pipeline for rank-deficient states, and exact spectra for stabilizer and
generalized GHZ states.
"""

from .correlations import (
    ContinuitySchedule,
    GHZSpec,
    analyze_state,
    binary_entropy,
    ghz_family,
    ghz_marginal_condition,
    ghz_state,
    spectrum_continuity,
    spectrum_full_rank,
    theorem3_spectrum,
    total_correlation,
)
from .maxent import extract_constraints, fit, product_state_closure
from .qstate import DensityMatrix, StateVector, partial_trace, von_neumann_entropy
from .spectrum import CorrelationSpectrum
from .stabilizer import (
    PauliString,
    StabilizerGroup,
    rank_profile,
    theorem2_spectrum,
    to_density_matrix,
    validate_group,
)

__version__ = "0.1.0"
