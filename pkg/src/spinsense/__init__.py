"""spinsense: two-qubit exchange-coupled spin dynamics with quasi-static
coupling noise, and magnetic-field readout from the non-damped
return-probability oscillation.
"""

from .dynamics import (
    analytic_propagator,
    check_density_matrix,
    density_from_pure,
    evolve_density,
    propagator_split,
)
from .estimator import (
    EstimatorConfig,
    FieldEstimate,
    InsufficientDataError,
    estimate_field,
    least_squares_refine,
    prepare_series,
    spectral_peak,
    window_start_time,
)
from .linalg import EigenSystem, eig_hermitian, kron, propagator_from_eigs
from .model import (
    SystemParams,
    exchange_hamiltonian,
    field_hamiltonian,
    pauli,
    plus_minus_state,
    plus_plus_state,
    total_hamiltonian,
)
from .noise import (
    NoiseEnsemble,
    analytic_averaged_density,
    mc_averaged_density,
    mc_averaged_density_series,
    phase_mean,
    phase_mean_series,
    sample_coupling,
    sample_couplings,
)
from .observables import (
    ObservableSeries,
    analytic_l1_coherence,
    analytic_return_probability,
    l1_coherence,
    return_probability,
)
from .runner import (
    estimation_times,
    return_probability_series,
    simulate_table,
    simulation_times,
)

__version__ = "0.1.0"

__all__ = [
    "EigenSystem",
    "EstimatorConfig",
    "FieldEstimate",
    "InsufficientDataError",
    "NoiseEnsemble",
    "ObservableSeries",
    "SystemParams",
    "analytic_averaged_density",
    "analytic_l1_coherence",
    "analytic_propagator",
    "analytic_return_probability",
    "check_density_matrix",
    "density_from_pure",
    "eig_hermitian",
    "estimate_field",
    "estimation_times",
    "evolve_density",
    "exchange_hamiltonian",
    "field_hamiltonian",
    "kron",
    "l1_coherence",
    "least_squares_refine",
    "mc_averaged_density",
    "mc_averaged_density_series",
    "pauli",
    "phase_mean",
    "phase_mean_series",
    "plus_minus_state",
    "plus_plus_state",
    "prepare_series",
    "propagator_from_eigs",
    "propagator_split",
    "return_probability",
    "return_probability_series",
    "sample_coupling",
    "sample_couplings",
    "simulate_table",
    "simulation_times",
    "spectral_peak",
    "total_hamiltonian",
    "window_start_time",
]
