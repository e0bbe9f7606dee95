"""Time-dependent Hamiltonian models H(lambda) and drive schedules lambda(t)."""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence, Tuple

import numpy as np

from ...errors import ParameterError, ScheduleError
from .linalg import check_hermitian

logger = logging.getLogger(__name__)

ScheduleShape = Literal["linear", "smoothstep", "sudden", "constant", "tabulated"]
SCHEDULE_SHAPES = ("linear", "smoothstep", "sudden", "constant", "tabulated")

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class DriveSchedule:
    """Control protocol lambda(t) on [0, duration].

    ``lambda(0) == start`` and ``lambda(duration) == end`` hold exactly for
    every shape. ``sudden`` jumps to ``end`` for any ``t > 0``.
    """

    duration: float
    shape: ScheduleShape
    start: float
    end: float
    knots: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if not self.duration > 0:
            raise ScheduleError(f"duration must be positive, got {self.duration}")
        if self.shape not in SCHEDULE_SHAPES:
            raise ScheduleError(f"unknown schedule shape {self.shape!r}")
        if self.shape == "constant" and self.end != self.start:
            raise ScheduleError("constant schedule needs start == end")
        if self.shape == "tabulated":
            self._validate_knots()

    def _validate_knots(self):
        if len(self.knots) < 2:
            raise ScheduleError("tabulated schedule needs at least two knots")
        times = np.array([t for t, _ in self.knots], dtype=float)
        if np.any(np.diff(times) <= 0):
            raise ScheduleError("tabulated knot times must be strictly increasing")
        if times[0] != 0.0 or times[-1] != self.duration:
            raise ScheduleError(
                f"tabulated knots must cover [0, {self.duration}], "
                f"got [{times[0]}, {times[-1]}]"
            )
        if self.knots[0][1] != self.start or self.knots[-1][1] != self.end:
            raise ScheduleError("tabulated endpoints must match start and end")

    @classmethod
    def tabulated(cls, knots: Sequence[Tuple[float, float]]) -> "DriveSchedule":
        knots = tuple((float(t), float(v)) for t, v in knots)
        if len(knots) < 2:
            raise ScheduleError("tabulated schedule needs at least two knots")
        return cls(
            duration=knots[-1][0],
            shape="tabulated",
            start=knots[0][1],
            end=knots[-1][1],
            knots=knots,
        )

    def value(self, t: float) -> float:
        if t < 0 or t > self.duration:
            raise ScheduleError(f"time {t} outside [0, {self.duration}]")
        if t == 0:
            return self.start
        if t == self.duration:
            return self.end
        s = t / self.duration
        delta = self.end - self.start
        if self.shape == "linear":
            return self.start + delta * s
        if self.shape == "smoothstep":
            return self.start + delta * (3 * s**2 - 2 * s**3)
        if self.shape == "sudden":
            return self.end
        if self.shape == "constant":
            return self.start
        times, values = zip(*self.knots)
        return float(np.interp(t, times, values))

    def values(self, times) -> np.ndarray:
        """Vectorized :meth:`value`."""
        t = np.asarray(times, dtype=float)
        if np.any(t < 0) or np.any(t > self.duration):
            raise ScheduleError(f"times outside [0, {self.duration}]")
        s = t / self.duration
        delta = self.end - self.start
        if self.shape == "linear":
            out = self.start + delta * s
        elif self.shape == "smoothstep":
            out = self.start + delta * (3 * s**2 - 2 * s**3)
        elif self.shape == "sudden":
            out = np.where(t > 0, self.end, self.start)
        elif self.shape == "constant":
            out = np.full_like(t, self.start)
        else:
            knot_t, knot_v = zip(*self.knots)
            out = np.interp(t, knot_t, knot_v)
        out = np.where(t == 0, self.start, out)
        return np.where(t == self.duration, self.end, out)

    @property
    def bounds(self) -> Tuple[float, float]:
        points = [self.start, self.end] + [v for _, v in self.knots]
        return min(points), max(points)


class HamiltonianModel(ABC):
    """A family of Hermitian operators H(lambda) of fixed dimension."""

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @abstractmethod
    def evaluate(self, lam: float) -> np.ndarray: ...


@dataclass(frozen=True)
class TwoLevelModel(HamiltonianModel):
    """``H = (lambda/2) diag(-1, 1) + (delta/2) sigma_axis``."""

    delta: float = 1.0
    axis: Literal["x", "y"] = "x"

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ParameterError(f"drive axis must be 'x' or 'y', got {self.axis!r}")

    @property
    def dim(self) -> int:
        return 2

    def evaluate(self, lam: float) -> np.ndarray:
        transverse = PAULI_X if self.axis == "x" else PAULI_Y
        return -0.5 * lam * PAULI_Z + 0.5 * self.delta * transverse


def lowering_operator(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)


def _check_fock_args(n_trunc: int, mass: float, hbar: float, omega_ref: float):
    if n_trunc < 2:
        raise ParameterError(f"n_trunc must be at least 2, got {n_trunc}")
    for name, value in (("mass", mass), ("hbar", hbar), ("omega_ref", omega_ref)):
        if not value > 0:
            raise ParameterError(f"{name} must be positive, got {value}")


def fock_operators(
    n_trunc: int, mass: float = 1.0, hbar: float = 1.0, omega_ref: float = 1.0
) -> Tuple[np.ndarray, np.ndarray]:
    """Position and momentum in the truncated Fock basis of the reference oscillator.

    Args:
        n_trunc: Number of retained number states
        mass: Oscillator mass
        hbar: Reduced Planck constant
        omega_ref: Frequency defining the ladder operators

    Returns:
        Tuple ``(x, p)``; ``[x, p] = i hbar`` holds on the upper-left
        ``n_trunc - 1`` block
    """
    _check_fock_args(n_trunc, mass, hbar, omega_ref)
    a = lowering_operator(n_trunc)
    x = np.sqrt(hbar / (2 * mass * omega_ref)) * (a + a.conj().T)
    p = 1j * np.sqrt(hbar * mass * omega_ref / 2) * (a.conj().T - a)
    return x, p


def fock_squares(
    n_trunc: int, mass: float = 1.0, hbar: float = 1.0, omega_ref: float = 1.0
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact matrix elements of ``x^2`` and ``p^2`` restricted to the truncated basis.

    The squares are formed one level above the cutoff and then truncated, so
    ``H(omega_ref)`` is exactly ``hbar omega_ref (n + 1/2)`` on every retained
    level.
    """
    _check_fock_args(n_trunc, mass, hbar, omega_ref)
    x, p = fock_operators(n_trunc + 1, mass=mass, hbar=hbar, omega_ref=omega_ref)
    return (x @ x)[:n_trunc, :n_trunc], (p @ p)[:n_trunc, :n_trunc]


@dataclass(frozen=True, eq=False)
class ParametricOscillatorModel(HamiltonianModel):
    """``H(omega) = p^2/2m + m omega^2 x^2/2`` in a fixed Fock basis of ``omega_ref``."""

    n_trunc: int
    mass: float = 1.0
    hbar: float = 1.0
    omega_ref: float = 1.0

    def __post_init__(self):
        _check_fock_args(self.n_trunc, self.mass, self.hbar, self.omega_ref)

    @property
    def dim(self) -> int:
        return self.n_trunc

    @cached_property
    def _squares(self) -> Tuple[np.ndarray, np.ndarray]:
        return fock_squares(self.n_trunc, self.mass, self.hbar, self.omega_ref)

    def evaluate(self, lam: float) -> np.ndarray:
        if not lam > 0:
            raise ParameterError(f"oscillator frequency must be positive, got {lam}")
        x2, p2 = self._squares
        return p2 / (2 * self.mass) + 0.5 * self.mass * lam**2 * x2


@dataclass(frozen=True, eq=False)
class CustomModel(HamiltonianModel):
    """Tabulated operators H(lambda_k), linearly interpolated between knots."""

    lambdas: np.ndarray
    hamiltonians: np.ndarray = field(repr=False)

    def __post_init__(self):
        lambdas = np.asarray(self.lambdas, dtype=float).ravel()
        hamiltonians = np.asarray(self.hamiltonians, dtype=complex)
        if hamiltonians.ndim != 3 or hamiltonians.shape[0] != len(lambdas):
            raise ParameterError(
                "custom model needs one square matrix per lambda, got "
                f"{len(lambdas)} lambdas and array of shape {hamiltonians.shape}"
            )
        if len(lambdas) > 1 and np.any(np.diff(lambdas) <= 0):
            raise ScheduleError("custom model lambdas must be strictly increasing")
        for k, h in enumerate(hamiltonians):
            check_hermitian(h, name=f"H(lambda={lambdas[k]})")
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "hamiltonians", hamiltonians)

    @classmethod
    def linear(cls, h_start, h_end) -> "CustomModel":
        """Linear interpolation ``(1 - lambda) H_start + lambda H_end`` on [0, 1]."""
        return cls(lambdas=np.array([0.0, 1.0]), hamiltonians=np.stack([h_start, h_end]))

    @property
    def dim(self) -> int:
        return self.hamiltonians.shape[1]

    def evaluate(self, lam: float) -> np.ndarray:
        lo, hi = self.lambdas[0], self.lambdas[-1]
        if lam < lo or lam > hi:
            raise ScheduleError(f"lambda {lam} outside tabulated range [{lo}, {hi}]")
        k = int(np.searchsorted(self.lambdas, lam, side="right")) - 1
        if k >= len(self.lambdas) - 1:
            return self.hamiltonians[-1].copy()
        w = (lam - self.lambdas[k]) / (self.lambdas[k + 1] - self.lambdas[k])
        return (1 - w) * self.hamiltonians[k] + w * self.hamiltonians[k + 1]


def evaluate(model: HamiltonianModel, lam: float) -> np.ndarray:
    """``H(lambda)`` checked for Hermiticity."""
    return check_hermitian(model.evaluate(lam), name=f"H({lam})")
