"""
annealbench: quantum versus classical annealing of the p-spin ferromagnet

Symmetric-subspace quantum annealing (real and imaginary time), heat-bath
simulated annealing, instantaneous spectra, Landau-Zener / envelope / Kramers
analysis, and a brute-force full-configuration oracle.
"""

from annealbench.analysis import (
    adiabatic_qa_prediction,
    adiabatic_sa_tail,
    barrier,
    envelope_closed_form_p2,
    envelope_implicit_pge3,
    fit_lz_family,
    fit_lz_regime,
    fit_sa_exponential,
    kramers_predict,
    lz_probability,
)
from annealbench.dynamics import (
    anneal,
    evolve_it,
    evolve_rt,
    evolve_sa,
    initial_quantum_state,
    residual_energy_classical,
    residual_energy_curve,
    residual_energy_quantum,
)
from annealbench.errors import AnnealBenchError
from annealbench.integrators import IntegrationMethod, IntegratorConfig
from annealbench.landscape import critical_temperature, entropy_density, free_energy_density
from annealbench.model import AnnealingSchedule, AnnealMode, Driver, ModelParams, classical_energy
from annealbench.operators import (
    build_effective_hamiltonian,
    build_master_generator,
    build_quantum_hamiltonian,
    equilibrium_distribution,
)
from annealbench.oracle import oracle_check
from annealbench.spectral import dynamical_gap, gap_scaling_fit, min_gap_scan
from annealbench.state import ProbabilityVector, ResidualEnergyCurve, WaveFunction

__all__ = [
    # Model
    "ModelParams", "AnnealingSchedule", "AnnealMode", "Driver", "classical_energy",
    # Operators
    "build_quantum_hamiltonian", "build_master_generator", "build_effective_hamiltonian",
    "equilibrium_distribution", "critical_temperature", "entropy_density", "free_energy_density",
    # Dynamics
    "IntegratorConfig", "IntegrationMethod", "WaveFunction", "ProbabilityVector",
    "initial_quantum_state", "evolve_rt", "evolve_it", "evolve_sa", "anneal",
    "residual_energy_quantum", "residual_energy_classical", "residual_energy_curve",
    # Spectral
    "dynamical_gap", "min_gap_scan", "gap_scaling_fit",
    # Analysis
    "ResidualEnergyCurve", "fit_lz_regime", "fit_lz_family", "envelope_closed_form_p2",
    "envelope_implicit_pge3", "lz_probability", "barrier", "kramers_predict",
    "adiabatic_qa_prediction", "adiabatic_sa_tail", "fit_sa_exponential",
    # Oracle
    "oracle_check",
    # Errors
    "AnnealBenchError",
]

__version__ = "1.0.0"
