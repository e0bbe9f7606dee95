"""Quantum work package - numerical core of the work-statistics pipelines.

Modules:
    linalg: Hermitian eigendecomposition, matrix exponentials, norms
    hamiltonians: Hamiltonian families H(lambda) and drive schedules
    propagation: Time-ordered propagators and state evolution
    thermo: Gibbs states, dephasing, entropies
    work: TTM and MF work distributions, Jarzynski identities, bounds
    oscillator: Parametric oscillator closed forms and Q*
"""

from .hamiltonians import (
    CustomModel,
    DriveSchedule,
    HamiltonianModel,
    ParametricOscillatorModel,
    TwoLevelModel,
)
from .linalg import SpectralDecomposition, eig_hermitian, expm_hermitian
from .oscillator import (
    OscillatorSpec,
    avg_work,
    delta_f,
    figure_sweep,
    mean_occupation,
    oscillator_cross_check,
    pseudo_partition,
    qstar_from_dynamics,
    rel_entropy_analytic,
)
from .propagation import PropagatorResult, evolve_state, propagate, propagate_converged
from .thermo import ThermalEnsemble, dephase, gibbs, relative_entropy, vn_entropy
from .work import (
    Paradigm,
    ProtocolRun,
    WorkDistribution,
    bounds_report,
    exp_average,
    mean_work,
    modified_jarzynski_report,
    pseudo_gibbs,
    ttm_distribution,
    ttm_joint,
)

__all__ = [
    "CustomModel",
    "DriveSchedule",
    "HamiltonianModel",
    "ParametricOscillatorModel",
    "TwoLevelModel",
    "SpectralDecomposition",
    "eig_hermitian",
    "expm_hermitian",
    "OscillatorSpec",
    "avg_work",
    "delta_f",
    "figure_sweep",
    "mean_occupation",
    "oscillator_cross_check",
    "pseudo_partition",
    "qstar_from_dynamics",
    "rel_entropy_analytic",
    "PropagatorResult",
    "evolve_state",
    "propagate",
    "propagate_converged",
    "ThermalEnsemble",
    "dephase",
    "gibbs",
    "relative_entropy",
    "vn_entropy",
    "Paradigm",
    "ProtocolRun",
    "WorkDistribution",
    "bounds_report",
    "exp_average",
    "mean_work",
    "modified_jarzynski_report",
    "pseudo_gibbs",
    "ttm_distribution",
    "ttm_joint",
]
