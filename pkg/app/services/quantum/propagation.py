"""Time-ordered propagators for driven Hamiltonians and state evolution."""

import logging
from dataclasses import dataclass

import numpy as np

from ...errors import DimensionMismatchError, ParameterError
from .hamiltonians import DriveSchedule, HamiltonianModel, evaluate
from .linalg import expm_hermitian, max_norm, unitarity_defect

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 2000
DEFAULT_UNITARITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PropagatorResult:
    """Time-ordered evolution operator together with its quality metrics."""

    unitary: np.ndarray
    steps: int
    unitarity_defect: float
    hbar: float
    tolerance: float = DEFAULT_UNITARITY_TOL
    self_convergence: float = float("nan")

    @property
    def within_tolerance(self) -> bool:
        return self.unitarity_defect <= self.tolerance

    @property
    def advice(self) -> str:
        if self.within_tolerance:
            return ""
        return (
            f"unitarity defect {self.unitarity_defect:.3e} above {self.tolerance:.1e}; "
            "increase the number of steps"
        )


def propagate(
    model: HamiltonianModel,
    schedule: DriveSchedule,
    steps: int = DEFAULT_STEPS,
    hbar: float = 1.0,
    tolerance: float = DEFAULT_UNITARITY_TOL,
) -> PropagatorResult:
    """Build ``U = T exp(-i/hbar int H(lambda(t)) dt)`` with the midpoint rule.

    Each step applies ``exp(-i dt/hbar H(lambda(t_k + dt/2)))`` from the left.
    Constant and sudden schedules have a time-independent integrand for
    ``t > 0`` and are exponentiated in one shot.

    Args:
        model: Hamiltonian family H(lambda)
        schedule: Control protocol lambda(t)
        steps: Number of piecewise-constant slices
        hbar: Reduced Planck constant
        tolerance: Maximum accepted unitarity defect

    Returns:
        PropagatorResult, flagged when the defect exceeds ``tolerance``
    """
    if steps < 1:
        raise ParameterError(f"steps must be at least 1, got {steps}")
    if not hbar > 0:
        raise ParameterError(f"hbar must be positive, got {hbar}")

    tau = schedule.duration
    if schedule.shape in ("constant", "sudden"):
        h = evaluate(model, schedule.end)
        u = expm_hermitian(h, -1j * tau / hbar)
    else:
        dt = tau / steps
        u = np.eye(model.dim, dtype=complex)
        for k in range(steps):
            h = evaluate(model, schedule.value((k + 0.5) * dt))
            u = expm_hermitian(h, -1j * dt / hbar) @ u

    result = PropagatorResult(
        unitary=u,
        steps=steps,
        unitarity_defect=unitarity_defect(u),
        hbar=hbar,
        tolerance=tolerance,
    )
    if not result.within_tolerance:
        logger.warning("Propagation flagged: %s", result.advice)
    return result


def propagate_converged(
    model: HamiltonianModel,
    schedule: DriveSchedule,
    steps: int = DEFAULT_STEPS,
    hbar: float = 1.0,
    target: float = 1e-8,
    max_steps: int = 2**20,
    tolerance: float = DEFAULT_UNITARITY_TOL,
) -> PropagatorResult:
    """Double the step count until successive propagators agree within ``target``."""
    current = propagate(model, schedule, steps=steps, hbar=hbar, tolerance=tolerance)
    while current.steps * 2 <= max_steps:
        refined = propagate(
            model, schedule, steps=current.steps * 2, hbar=hbar, tolerance=tolerance
        )
        diff = max_norm(refined.unitary - current.unitary)
        current = PropagatorResult(
            unitary=refined.unitary,
            steps=refined.steps,
            unitarity_defect=refined.unitarity_defect,
            hbar=hbar,
            tolerance=tolerance,
            self_convergence=diff,
        )
        logger.debug("Propagator at %s steps changed by %.3e", current.steps, diff)
        if diff <= target:
            return current
    logger.warning(
        "Propagator not self-converged to %.1e after %s steps", target, current.steps
    )
    return current


def evolve_state(state, unitary) -> np.ndarray:
    """Evolve a state vector (``U psi``) or density matrix (``U rho U^H``)."""
    u = np.asarray(unitary, dtype=complex)
    s = np.asarray(state, dtype=complex)
    if s.shape[0] != u.shape[0] or (s.ndim == 2 and s.shape[1] != u.shape[0]):
        raise DimensionMismatchError(
            f"state of shape {s.shape} does not match propagator of shape {u.shape}"
        )
    if s.ndim == 1:
        return u @ s
    if s.ndim == 2:
        return u @ s @ u.conj().T
    raise DimensionMismatchError(f"state must be a vector or matrix, got {s.ndim} dims")
