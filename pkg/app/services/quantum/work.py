"""Work distributions for the two-time measurement (TTM) and measurement-free (MF)
paradigms, and the fluctuation-theorem quantities built on them."""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np
import pandas as pd
from scipy.special import logsumexp

from ...errors import DimensionMismatchError, ParameterError
from ...schemas.reports import (
    BoundsReport,
    MFSummary,
    ModifiedJarzynskiReport,
    RelativeEntropyTerms,
    TTMSummary,
)
from .linalg import SpectralDecomposition, eig_hermitian, require_same_dim
from .propagation import PropagatorResult, evolve_state
from .thermo import (
    ThermalEnsemble,
    cross_entropy,
    dephase,
    gibbs,
    measurement_entropy_change,
    relative_entropy_to_gibbs,
    vn_entropy,
)

logger = logging.getLogger(__name__)

MERGE_RTOL = 1e-12
TRANSITION_FLOOR = 1e-14
BASIS_CONVENTION = "eigh-ascending; degenerate subspaces by lexicographic Gram-Schmidt pivoting"


def _exp(x: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.exp(x))


class Paradigm(str, Enum):
    TTM = "ttm"
    MF = "mf"


@dataclass(frozen=True, eq=False)
class WorkDistribution:
    """Finite set of work atoms ``(w, prob)`` sorted by ``w``."""

    values: np.ndarray
    probabilities: np.ndarray
    paradigm: Paradigm

    def __len__(self) -> int:
        return len(self.values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"w": self.values, "prob": self.probabilities})


def merge_atoms(values, probabilities, paradigm: Paradigm) -> WorkDistribution:
    """Sort atoms and merge neighbours closer than ``1e-12 (1 + |w|)``.

    Negative round-off probabilities are clipped and exact zeros dropped.
    """
    values = np.asarray(values, dtype=float).ravel()
    probabilities = np.clip(np.asarray(probabilities, dtype=float).ravel(), 0.0, None)
    if values.shape != probabilities.shape:
        raise DimensionMismatchError("values and probabilities differ in length")
    order = np.argsort(values, kind="stable")

    merged_w, merged_p = [], []
    for w, p in zip(values[order], probabilities[order]):
        if p == 0.0:
            continue
        if merged_w and abs(w - merged_w[-1]) <= MERGE_RTOL * (1 + abs(merged_w[-1])):
            merged_p[-1] += p
        else:
            merged_w.append(w)
            merged_p.append(p)
    return WorkDistribution(np.array(merged_w), np.array(merged_p), paradigm)


@dataclass(frozen=True, eq=False)
class JointProbabilityTable:
    """``p(n0; n_tau)`` indexed by initial and final level."""

    probabilities: np.ndarray
    initial_energies: np.ndarray
    final_energies: np.ndarray

    @property
    def row_marginals(self) -> np.ndarray:
        return self.probabilities.sum(axis=1)

    @property
    def column_marginals(self) -> np.ndarray:
        return self.probabilities.sum(axis=0)


def _level_diagonal(matrix: np.ndarray, spectrum: SpectralDecomposition) -> np.ndarray:
    """``tr(P_n M)`` for every level ``n`` of ``spectrum``."""
    v = spectrum.basis
    diag = np.real(np.einsum("ji,jk,ki->i", v.conj(), matrix, v))
    return np.bincount(spectrum.labels, weights=diag, minlength=spectrum.n_levels)


def ttm_joint(
    initial: ThermalEnsemble,
    unitary,
    spec_0: SpectralDecomposition,
    spec_tau: SpectralDecomposition,
) -> JointProbabilityTable:
    """Joint probabilities ``tr(P_tau U P_0 rho_0 P_0 U^H)`` of the two energy readings.

    The Gibbs state gives ``P_0 rho_0 P_0 = p(n0) P_0``, so each row is the
    occupation times ``tr(P_tau U P_0 U^H)``. Transition entries at or below
    ``1e-14`` of their row sum are round-off and set to zero.
    """
    u = np.asarray(unitary, dtype=complex)
    require_same_dim(u, initial.rho, spec_0.basis, spec_tau.basis)
    if len(initial.occupations) != spec_0.n_levels:
        raise DimensionMismatchError("initial ensemble and spec_0 have different levels")
    table = np.empty((spec_0.n_levels, spec_tau.n_levels))
    for n0, p0 in enumerate(spec_0.projectors):
        table[n0] = _level_diagonal(evolve_state(p0, u), spec_tau)
    table = np.clip(table, 0.0, None)
    table[table <= TRANSITION_FLOOR * table.sum(axis=1, keepdims=True)] = 0.0
    return JointProbabilityTable(
        probabilities=initial.occupations[:, None] * table,
        initial_energies=spec_0.eigenvalues,
        final_energies=spec_tau.eigenvalues,
    )


def ttm_distribution(
    joint: JointProbabilityTable,
    spec_0: SpectralDecomposition,
    spec_tau: SpectralDecomposition,
) -> WorkDistribution:
    """Atoms at ``e(n_tau) - e(n0)`` weighted by the joint table."""
    if joint.probabilities.shape != (spec_0.n_levels, spec_tau.n_levels):
        raise DimensionMismatchError("joint table does not match the spectra")
    work = spec_tau.eigenvalues[None, :] - spec_0.eigenvalues[:, None]
    return merge_atoms(work, joint.probabilities, Paradigm.TTM)


def transition_probabilities(
    unitary, spec_0: SpectralDecomposition, spec_tau: SpectralDecomposition
) -> np.ndarray:
    """``p_{n0, n_tau} = |<n_tau|U|n0>|^2`` summed over final levels.

    Rows follow the initial basis vectors of ``spec_0`` and sum to one.
    """
    u = np.asarray(unitary, dtype=complex)
    require_same_dim(u, spec_0.basis, spec_tau.basis)
    amplitudes = spec_tau.basis.conj().T @ u @ spec_0.basis
    indicator = np.eye(spec_tau.n_levels)[spec_tau.labels]
    return (np.abs(amplitudes) ** 2).T @ indicator


def evolved_energies(unitary, h_tau, spec_0: SpectralDecomposition) -> np.ndarray:
    """``<n0|U^H H_tau U|n0>`` for every initial basis vector."""
    u = np.asarray(unitary, dtype=complex)
    h = np.asarray(h_tau, dtype=complex)
    require_same_dim(u, h, spec_0.basis)
    evolved = u @ spec_0.basis
    return np.real(np.einsum("ji,jk,ki->i", evolved.conj(), h, evolved))


def mf_work_values(unitary, h_tau, spec_0: SpectralDecomposition) -> np.ndarray:
    """Measurement-free work, one value per initial basis vector."""
    return evolved_energies(unitary, h_tau, spec_0) - spec_0.basis_energies


def mf_distribution(values, occupations) -> WorkDistribution:
    """Atoms ``(W_n0, p(n0))`` weighted by the initial thermal occupations."""
    return merge_atoms(values, occupations, Paradigm.MF)


def mean_work(distribution: WorkDistribution) -> float:
    return float(np.dot(distribution.values, distribution.probabilities))


def log_exp_average(distribution: WorkDistribution, beta: float) -> float:
    """``ln <exp(-beta W)>`` evaluated with a max shift."""
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    return float(logsumexp(-beta * distribution.values, b=distribution.probabilities))


def exp_average(distribution: WorkDistribution, beta: float) -> float:
    return _exp(log_exp_average(distribution, beta))


@dataclass(frozen=True, eq=False)
class PseudoGibbs:
    """Thermal guess built on the time-evolved initial eigenbasis."""

    beta: float
    log_partition: float
    energies: np.ndarray
    weights: np.ndarray
    rho: np.ndarray
    mean_energy: float

    @property
    def partition_function(self) -> float:
        return _exp(self.log_partition)


def pseudo_gibbs(unitary, h_tau, spec_0: SpectralDecomposition, beta: float) -> PseudoGibbs:
    """Pseudo-partition function and pseudo-Gibbs state of the evolved eigenbasis.

    Args:
        unitary: Propagator U
        h_tau: Final Hamiltonian
        spec_0: Spectral decomposition of the initial Hamiltonian
        beta: Inverse temperature

    Returns:
        PseudoGibbs with ``ln Z~``, weights, ``rho~`` and the mean energy ``E~``
    """
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    energies = evolved_energies(unitary, h_tau, spec_0)
    shift = float(np.min(energies))
    boltzmann = np.exp(-beta * (energies - shift))
    z_shifted = float(np.sum(boltzmann))
    weights = boltzmann / z_shifted
    evolved = np.asarray(unitary, dtype=complex) @ spec_0.basis
    return PseudoGibbs(
        beta=beta,
        log_partition=math.log(z_shifted) - beta * shift,
        energies=energies,
        weights=weights,
        rho=(evolved * weights) @ evolved.conj().T,
        mean_energy=float(np.dot(weights, energies)),
    )


def pseudo_log_partition_from_transitions(
    transitions: np.ndarray, spec_tau: SpectralDecomposition, beta: float
) -> float:
    """``ln Z~`` from ``sum_n0 exp(-beta sum_ntau e(n_tau) p_{n0,n_tau})``."""
    mean_final = transitions @ spec_tau.eigenvalues
    return float(logsumexp(-beta * mean_final))


@dataclass(frozen=True, eq=False)
class ProtocolRun:
    """Everything a unitary protocol between two thermal references determines."""

    beta: float
    initial: ThermalEnsemble
    final: ThermalEnsemble
    unitary: np.ndarray

    @classmethod
    def from_unitary(cls, h_0, h_tau, unitary, beta: float) -> "ProtocolRun":
        u = np.asarray(unitary, dtype=complex)
        require_same_dim(h_0, h_tau, u)
        return cls(
            beta=beta,
            initial=gibbs(h_0, beta, spectrum=eig_hermitian(h_0)),
            final=gibbs(h_tau, beta, spectrum=eig_hermitian(h_tau)),
            unitary=u,
        )

    @property
    def spec_0(self) -> SpectralDecomposition:
        return self.initial.spectrum

    @property
    def spec_tau(self) -> SpectralDecomposition:
        return self.final.spectrum

    @property
    def delta_f(self) -> float:
        return self.final.free_energy - self.initial.free_energy

    @cached_property
    def rho_tau(self) -> np.ndarray:
        return evolve_state(self.initial.rho, self.unitary)

    @cached_property
    def first_law_work(self) -> float:
        """``tr(rho_tau H_tau) - tr(rho_0 H_0)``."""
        final = np.real(np.trace(self.rho_tau @ self.final.hamiltonian))
        return float(final - self.initial.mean_energy)

    @cached_property
    def joint(self) -> JointProbabilityTable:
        return ttm_joint(self.initial, self.unitary, self.spec_0, self.spec_tau)

    @cached_property
    def ttm(self) -> WorkDistribution:
        return ttm_distribution(self.joint, self.spec_0, self.spec_tau)

    @cached_property
    def mf_values(self) -> np.ndarray:
        return mf_work_values(self.unitary, self.final.hamiltonian, self.spec_0)

    @cached_property
    def mf(self) -> WorkDistribution:
        return mf_distribution(self.mf_values, self.initial.state_occupations)

    @cached_property
    def pseudo(self) -> PseudoGibbs:
        return pseudo_gibbs(self.unitary, self.final.hamiltonian, self.spec_0, self.beta)

    @cached_property
    def transitions(self) -> np.ndarray:
        return transition_probabilities(self.unitary, self.spec_0, self.spec_tau)

    @cached_property
    def relative_entropy(self) -> float:
        """``S(rho~ || rho_eq)`` evaluated on matrices."""
        return relative_entropy_to_gibbs(self.pseudo.rho, self.final)

    @property
    def relative_entropy_closed_form(self) -> float:
        """``ln(Z_tau / Z~)``."""
        return self.final.log_partition - self.pseudo.log_partition

    def mf_diagnostics(self) -> pd.DataFrame:
        """Unmerged MF atoms, one row per initial basis vector."""
        return pd.DataFrame(
            {
                "index": np.arange(self.spec_0.dim),
                "level": self.spec_0.labels,
                "initial_energy": self.spec_0.basis_energies,
                "evolved_energy": self.pseudo.energies,
                "w": self.mf_values,
                "prob": self.initial.state_occupations,
            }
        )


def modified_jarzynski_report(run: ProtocolRun) -> ModifiedJarzynskiReport:
    """Check ``<exp(-beta W)>_MF = exp(-beta dF) exp(-S)`` and the closed form of S."""
    lhs = exp_average(run.mf, run.beta)
    s_rel = run.relative_entropy
    s_closed = run.relative_entropy_closed_form
    support_violation = not math.isfinite(s_rel)
    if support_violation:
        logger.warning("Pseudo-Gibbs state leaves the support of the equilibrium state")
        rhs = 0.0
    else:
        rhs = _exp(-run.beta * run.delta_f - s_rel)
    residual = abs(lhs - rhs)
    return ModifiedJarzynskiReport(
        lhs=lhs,
        delta_f=run.delta_f,
        s_rel=s_rel,
        s_rel_closed_form=s_closed,
        rhs=rhs,
        residual=residual,
        relative_residual=residual / rhs if rhs > 0 else math.inf,
        closed_form_residual=abs(s_rel - s_closed),
        support_violation=support_violation,
    )


def bounds_report(run: ProtocolRun) -> BoundsReport:
    """Maximum-work theorem with and without the informational correction."""
    beta = run.beta
    w = mean_work(run.mf)
    s_rel = run.relative_entropy
    f0 = run.initial.free_energy
    f_tau = run.final.free_energy
    f_tilde_tau = f_tau + s_rel / beta
    beta_df = beta * run.delta_f
    beta_df_tilde = beta * (f_tilde_tau - f0)
    return BoundsReport(
        beta_w=beta * w,
        beta_df=beta_df,
        s_rel=s_rel,
        beta_df_tilde=beta_df_tilde,
        slack19=beta * w - beta_df - s_rel,
        slack21=beta * w - beta_df_tilde,
        slack_max_work=beta * w - beta_df,
        f0=f0,
        f_tau=f_tau,
        f_tilde_tau=f_tilde_tau,
    )


def relative_entropy_terms(run: ProtocolRun) -> RelativeEntropyTerms:
    """Negentropy and cross entropy of ``rho~``, on matrices and in closed form."""
    pseudo = run.pseudo
    return RelativeEntropyTerms(
        negentropy=-vn_entropy(pseudo.rho),
        negentropy_closed_form=-pseudo.log_partition - run.beta * pseudo.mean_energy,
        cross_entropy=cross_entropy(pseudo.rho, run.final.log_rho),
        cross_entropy_closed_form=-run.final.log_partition - run.beta * pseudo.mean_energy,
        pseudo_mean_energy=pseudo.mean_energy,
    )


def ttm_summary(run: ProtocolRun, propagator: PropagatorResult | None = None) -> TTMSummary:
    log_ratio = log_exp_average(run.ttm, run.beta) + run.initial.log_partition
    rho_m = dephase(run.rho_tau, run.spec_tau)
    h_tau = run.final.hamiltonian
    return TTMSummary(
        mean_work=mean_work(run.ttm),
        exp_avg=exp_average(run.ttm, run.beta),
        z0=run.initial.partition_function,
        ztau=run.final.partition_function,
        delta_f=run.delta_f,
        jarzynski_residual=abs(np.expm1(log_ratio - run.final.log_partition)),
        first_law_residual=abs(mean_work(run.ttm) - run.first_law_work),
        measurement_entropy_change=measurement_entropy_change(run.rho_tau, run.spec_tau),
        dephasing_energy_residual=float(
            abs(np.trace(rho_m @ h_tau) - np.trace(run.rho_tau @ h_tau))
        ),
        atoms=len(run.ttm),
        unitarity_defect=propagator.unitarity_defect if propagator else None,
        steps=propagator.steps if propagator else None,
    )


def mf_summary(run: ProtocolRun, propagator: PropagatorResult | None = None) -> MFSummary:
    report = modified_jarzynski_report(run)
    bounds = bounds_report(run)
    log_z_transitions = pseudo_log_partition_from_transitions(
        run.transitions, run.spec_tau, run.beta
    )
    return MFSummary(
        mean_work=mean_work(run.mf),
        exp_avg=report.lhs,
        z_tilde=run.pseudo.partition_function,
        z_tilde_transitions=_exp(log_z_transitions),
        s_rel_matrix=report.s_rel,
        s_rel_closed_form=report.s_rel_closed_form,
        residual_eq18=report.residual,
        slack_eq19=bounds.slack19,
        pseudo_partition_residual=abs(np.expm1(log_z_transitions - run.pseudo.log_partition)),
        atoms=len(run.mf),
        basis_convention=BASIS_CONVENTION,
        relative_entropy_terms=relative_entropy_terms(run),
        bounds=bounds,
        unitarity_defect=propagator.unitarity_defect if propagator else None,
        steps=propagator.steps if propagator else None,
    )
