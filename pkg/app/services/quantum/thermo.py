"""Gibbs ensembles, free energies, measurement dephasing and entropy functionals.

Entropies use the natural logarithm (k_B = 1).
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import linalg as sla
from scipy.special import entr

from ...errors import InvalidStateError, ParameterError
from .linalg import (
    SpectralDecomposition,
    as_matrix,
    eig_hermitian,
    hermitian_defect,
    require_same_dim,
)

logger = logging.getLogger(__name__)

STATE_TOL = 1e-10
SUPPORT_EIG_TOL = 1e-14
SUPPORT_WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ThermalEnsemble:
    """Gibbs state ``exp(-beta H) / Z`` with its spectral bookkeeping.

    ``occupations[n]`` is the probability of a single eigenstate of level
    ``n``; degenerate eigenstates are equally occupied.
    """

    beta: float
    hamiltonian: np.ndarray
    spectrum: SpectralDecomposition
    log_partition: float
    occupations: np.ndarray
    rho: np.ndarray

    @property
    def partition_function(self) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_partition))

    @property
    def free_energy(self) -> float:
        return -self.log_partition / self.beta

    @property
    def state_occupations(self) -> np.ndarray:
        """Occupation of every spectral basis vector."""
        return self.occupations[self.spectrum.labels]

    @property
    def mean_energy(self) -> float:
        mult = np.array(self.spectrum.multiplicities)
        return float(np.sum(mult * self.occupations * self.spectrum.eigenvalues))

    @cached_property
    def log_rho(self) -> np.ndarray:
        """Exact matrix logarithm ``-beta H - ln Z``."""
        dim = self.hamiltonian.shape[0]
        return -self.beta * self.hamiltonian - self.log_partition * np.eye(dim)


def gibbs(
    hamiltonian, beta: float, spectrum: Optional[SpectralDecomposition] = None
) -> ThermalEnsemble:
    """Thermal state of ``hamiltonian`` at inverse temperature ``beta``.

    Boltzmann weights are shifted by the ground energy, so ``ln Z`` stays
    finite even when ``Z`` itself does not fit a double.
    """
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    h = as_matrix(hamiltonian, name="hamiltonian")
    if spectrum is None:
        spectrum = eig_hermitian(h)

    energies = spectrum.eigenvalues
    mult = np.array(spectrum.multiplicities)
    weights = np.exp(-beta * (energies - energies[0]))
    z_shifted = float(np.sum(mult * weights))
    occupations = weights / z_shifted
    rho = sum(p * proj for p, proj in zip(occupations, spectrum.projectors))

    return ThermalEnsemble(
        beta=beta,
        hamiltonian=h,
        spectrum=spectrum,
        log_partition=math.log(z_shifted) - beta * float(energies[0]),
        occupations=occupations,
        rho=rho,
    )


def free_energy(z: float, beta: float) -> float:
    """``F = -(1/beta) ln Z``."""
    if not z > 0:
        raise ParameterError(f"partition function must be positive, got {z}")
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")
    return -math.log(z) / beta


def check_density_matrix(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of ``rho``."""
    m = as_matrix(rho, name="density matrix")
    defect = hermitian_defect(m)
    if defect > tol:
        raise InvalidStateError(f"density matrix not Hermitian (defect {defect:.3e})")
    tr = np.trace(m).real
    if abs(tr - 1) > tol:
        raise InvalidStateError(f"density matrix trace is {tr!r}, expected 1")
    lowest = float(sla.eigvalsh(0.5 * (m + m.conj().T))[0])
    if lowest < -tol:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lowest:.3e}")
    return m


def dephase(rho, spectrum: SpectralDecomposition) -> np.ndarray:
    """Average post-measurement state ``sum_n P_n rho P_n``."""
    m = as_matrix(rho, name="density matrix")
    require_same_dim(m, spectrum.basis)
    return sum(p @ m @ p for p in spectrum.projectors)


def vn_entropy(rho) -> float:
    """Von Neumann entropy ``-tr(rho ln rho)``, with ``0 ln 0 = 0``."""
    m = as_matrix(rho, name="density matrix")
    mu = sla.eigvalsh(0.5 * (m + m.conj().T))
    return float(np.sum(entr(np.clip(mu, 0.0, None))))


def measurement_entropy_change(rho, spectrum: SpectralDecomposition) -> float:
    """Entropy produced by a non-selective projective measurement in ``spectrum``."""
    return vn_entropy(dephase(rho, spectrum)) - vn_entropy(rho)


def cross_entropy(rho, log_sigma) -> float:
    """``tr(rho ln sigma)`` given the matrix logarithm of ``sigma``."""
    a = np.asarray(rho)
    return float(np.real(np.sum(a * np.asarray(log_sigma).T)))


def relative_entropy(rho_a, rho_b, log_b: Optional[np.ndarray] = None) -> float:
    """Quantum relative entropy ``tr(a ln a) - tr(a ln b)``.

    When ``log_b`` is given it is used as the exact logarithm of ``rho_b``
    and the support test is skipped. Otherwise eigenvalues of ``rho_b``
    below ``1e-14`` define its kernel; weight of ``rho_a`` on that kernel
    returns ``math.inf`` instead of raising.
    """
    a = check_density_matrix(rho_a)
    negentropy = -vn_entropy(a)
    if log_b is not None:
        require_same_dim(a, log_b)
        return negentropy - cross_entropy(a, log_b)

    b = check_density_matrix(rho_b)
    require_same_dim(a, b)
    mu, vectors = sla.eigh(0.5 * (b + b.conj().T))
    a_diag = np.real(np.einsum("ij,jk,ki->i", vectors.conj().T, a, vectors))
    support = mu > SUPPORT_EIG_TOL
    outside = float(np.sum(a_diag[~support]))
    if outside > SUPPORT_WEIGHT_TOL:
        logger.warning(
            "Relative entropy is infinite: %.3e of the weight lies outside the support",
            outside,
        )
        return math.inf
    return negentropy - float(np.sum(a_diag[support] * np.log(mu[support])))


def relative_entropy_to_gibbs(rho, ensemble: ThermalEnsemble) -> float:
    return relative_entropy(rho, ensemble.rho, log_b=ensemble.log_rho)
