"""Parametric harmonic oscillator: closed-form work statistics, the adiabaticity
measure Q*, figure sweeps and cross-validation against truncated-Fock numerics."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ...errors import ParameterError
from ...schemas.config import OscillatorSection
from ...schemas.reports import OscillatorCrossCheck, SweepResult, SweepRow
from .hamiltonians import DriveSchedule, ParametricOscillatorModel, ScheduleShape, evaluate
from .propagation import propagate
from .work import ProtocolRun, mean_work

logger = logging.getLogger(__name__)

QSTAR_FLOOR_TOL = 1e-9
ODE_TOL = 1e-10
ODE_CHUNK = 1 << 16
TAIL_FRACTION = 0.1
TAIL_LIMIT = 1e-8
CROSS_CHECK_TOL = 1e-3


@dataclass(frozen=True)
class OscillatorSpec:
    """Frequency protocol ``omega_0 -> omega_tau`` of a parametric oscillator."""

    omega_0: float
    omega_tau: float
    beta: float = 1.0
    hbar: float = 1.0
    mass: float = 1.0
    duration: float = 1.0
    shape: ScheduleShape = "smoothstep"

    def __post_init__(self):
        for name in ("omega_0", "omega_tau", "beta", "hbar", "mass", "duration"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def schedule(self) -> DriveSchedule:
        return DriveSchedule(
            duration=self.duration,
            shape=self.shape,
            start=self.omega_0,
            end=self.omega_tau,
        )

    def with_duration(self, duration: float) -> "OscillatorSpec":
        return replace(self, duration=duration)

    @classmethod
    def from_section(cls, section: OscillatorSection) -> "OscillatorSpec":
        return cls(
            omega_0=section.omega_0,
            omega_tau=section.omega_tau,
            beta=section.beta,
            hbar=section.hbar,
            mass=section.mass,
            duration=section.duration,
            shape=section.shape,
        )


@dataclass(frozen=True)
class AdiabaticityMeasure:
    """Q* together with the diagnostics of the classical integration."""

    qstar: float
    steps: int
    converged: bool
    change: float
    wronskian_defect: float


def _rk4_transfer(w_a: np.ndarray, w_b: np.ndarray, w_c: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step of ``u'' = -w(t) u`` as a batch of 2x2 matrices.

    ``w_a``, ``w_b``, ``w_c`` are the squared frequencies at the start, the
    midpoint and the end of every step.
    """
    n = len(w_a)

    def apply_a(w, m):
        # [[0, 1], [-w, 0]] @ m
        out = np.empty_like(m)
        out[:, 0, :] = m[:, 1, :]
        out[:, 1, :] = -w[:, None] * m[:, 0, :]
        return out

    eye = np.broadcast_to(np.eye(2), (n, 2, 2))
    k1 = apply_a(w_a, eye)
    k2 = apply_a(w_b, eye + 0.5 * h * k1)
    k3 = apply_a(w_b, eye + 0.5 * h * k2)
    k4 = apply_a(w_c, eye + h * k3)
    return eye + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """``M[n-1] @ ... @ M[1] @ M[0]`` by pairwise reduction."""
    while len(mats) > 1:
        if len(mats) % 2:
            mats = np.concatenate([mats, np.eye(2)[None]])
        mats = np.matmul(mats[1::2], mats[0::2])
    return mats[0]


def fundamental_matrix(spec: OscillatorSpec, steps: int) -> Tuple[np.ndarray, float]:
    """Transfer matrix of ``u'' = -omega(t)^2 u`` over ``[0, tau]``.

    Column 0 is the solution with ``(u, u') = (1, 0)`` at ``t = 0``, column 1
    the one with ``(0, 1)``.

    Returns:
        Tuple of the 2x2 matrix and the largest Wronskian drift along the path
    """
    schedule = spec.schedule
    h = spec.duration / steps
    phi = np.eye(2)
    det_path = 1.0
    drift = 0.0
    for first in range(0, steps, ODE_CHUNK):
        k = np.arange(first, min(first + ODE_CHUNK, steps), dtype=float)
        t_a = k * h
        t_c = np.minimum((k + 1) * h, spec.duration)
        t_b = 0.5 * (t_a + t_c)
        mats = _rk4_transfer(
            schedule.values(t_a) ** 2,
            schedule.values(t_b) ** 2,
            schedule.values(t_c) ** 2,
            h,
        )
        dets = det_path * np.cumprod(np.linalg.det(mats))
        drift = max(drift, float(np.max(np.abs(dets - 1.0))))
        det_path = float(dets[-1])
        phi = _ordered_product(mats) @ phi
    return phi, drift


def qstar_from_fundamental(phi: np.ndarray, omega_0: float, omega_tau: float) -> float:
    y, y_dot = phi[0, 0], phi[1, 0]
    x, x_dot = phi[0, 1], phi[1, 1]
    numerator = omega_0**2 * (omega_tau**2 * x**2 + x_dot**2) + (
        omega_tau**2 * y**2 + y_dot**2
    )
    return float(numerator / (2 * omega_0 * omega_tau))


def qstar_from_dynamics(
    spec: OscillatorSpec,
    ode_steps: int = 1000,
    tol: float = ODE_TOL,
    max_doublings: int = 12,
) -> AdiabaticityMeasure:
    """Adiabaticity measure Q* from the two classical solutions of the protocol.

    RK4 at fixed step, doubled until Q* changes by less than
    ``tol * max(1, Q*)``.

    Args:
        spec: Oscillator protocol
        ode_steps: Initial number of RK4 steps (at least 100)
        tol: Step-doubling acceptance tolerance
        max_doublings: Upper bound on the number of doublings

    Returns:
        AdiabaticityMeasure, with ``converged=False`` when the doubling
        budget ran out
    """
    if ode_steps < 100:
        raise ParameterError(f"ode_steps must be at least 100, got {ode_steps}")

    steps = ode_steps
    phi, drift = fundamental_matrix(spec, steps)
    qstar = qstar_from_fundamental(phi, spec.omega_0, spec.omega_tau)
    change = math.inf
    converged = False
    for _ in range(max_doublings):
        steps *= 2
        phi, drift = fundamental_matrix(spec, steps)
        refined = qstar_from_fundamental(phi, spec.omega_0, spec.omega_tau)
        change = abs(refined - qstar)
        qstar = refined
        if change <= tol * max(1.0, qstar):
            converged = True
            break

    if not converged:
        logger.warning("Q* integration not converged after %s steps (change %.3e)", steps, change)
    if qstar < 1 - QSTAR_FLOOR_TOL:
        logger.warning("Q* = %.12f below 1; integration is inaccurate", qstar)
    return AdiabaticityMeasure(
        qstar=qstar,
        steps=steps,
        converged=converged,
        change=change,
        wronskian_defect=drift,
    )


def _check_qstar(qstar: float):
    if qstar < 1 - QSTAR_FLOOR_TOL:
        raise ParameterError(f"Q* must be at least 1, got {qstar}")


def _log_sinh(x: float) -> float:
    """``ln sinh(x)`` for ``x > 0`` without overflow or cancellation."""
    if not x > 0:
        raise ParameterError(f"beta hbar omega / 2 must be positive, got {x}")
    return x + math.log(-math.expm1(-2 * x)) - math.log(2)


def partition_function(omega: float, beta: float, hbar: float = 1.0) -> float:
    """``1 / (2 sinh(beta hbar omega / 2))``, underflowing to 0 at large ``beta``."""
    return math.exp(-_log_sinh(0.5 * beta * hbar * omega) - math.log(2))


def avg_work(qstar: float, spec: OscillatorSpec) -> float:
    """``<W> = hbar/2 (Q* omega_tau - omega_0) coth(beta hbar omega_0 / 2)``."""
    _check_qstar(qstar)
    x0 = 0.5 * spec.beta * spec.hbar * spec.omega_0
    return 0.5 * spec.hbar * (qstar * spec.omega_tau - spec.omega_0) / math.tanh(x0)


def delta_f(spec: OscillatorSpec) -> float:
    """Equilibrium free-energy change ``(1/beta) ln(sinh(x_tau) / sinh(x_0))``."""
    x0 = 0.5 * spec.beta * spec.hbar * spec.omega_0
    xt = 0.5 * spec.beta * spec.hbar * spec.omega_tau
    return (_log_sinh(xt) - _log_sinh(x0)) / spec.beta


def pseudo_partition(qstar: float, spec: OscillatorSpec) -> float:
    """``Z~ = 1 / (2 sinh(beta Q* hbar omega_tau / 2))``."""
    _check_qstar(qstar)
    return partition_function(qstar * spec.omega_tau, spec.beta, spec.hbar)


def rel_entropy_analytic(qstar: float, spec: OscillatorSpec) -> float:
    """``S = ln(sinh(Q* x_tau) / sinh(x_tau))`` with ``x_tau = beta hbar omega_tau / 2``."""
    _check_qstar(qstar)
    xt = 0.5 * spec.beta * spec.hbar * spec.omega_tau
    return _log_sinh(qstar * xt) - _log_sinh(xt)


def mean_occupation(n0: int, qstar: float) -> float:
    """Average final occupation number ``(n0 + 1/2) Q* - 1/2``."""
    if n0 < 0:
        raise ParameterError(f"n0 must be non-negative, got {n0}")
    return (n0 + 0.5) * qstar - 0.5


def sweep_row(qstar: float, spec: OscillatorSpec, duration: Optional[float] = None) -> SweepRow:
    beta_df = spec.beta * delta_f(spec)
    return SweepRow(
        qstar=qstar,
        beta_w=spec.beta * avg_work(qstar, spec),
        beta_df=beta_df,
        beta_df_plus_s=beta_df + rel_entropy_analytic(qstar, spec),
        duration=duration,
    )


def _trend(values: Sequence[float]) -> str:
    diffs = np.diff(np.asarray(values, dtype=float))
    if len(diffs) == 0 or np.all(diffs == 0):
        return "constant"
    if np.all(diffs >= 0):
        return "increasing"
    if np.all(diffs <= 0):
        return "decreasing"
    return "non-monotonic"


def figure_sweep(
    spec: OscillatorSpec,
    qstars: Optional[Sequence[float]] = None,
    durations: Optional[Sequence[float]] = None,
    ode_steps: int = 1000,
    workers: int = 1,
    preset: Optional[str] = None,
) -> SweepResult:
    """Tabulate ``beta<W>``, ``beta dF`` and ``beta dF + S`` over a Q* or tau grid.

    Exactly one of ``qstars`` and ``durations`` is used; in tau mode every
    row's Q* comes from :func:`qstar_from_dynamics`. Rows keep grid order.
    """
    if durations is not None:
        grid, mode = list(durations), "tau"
    elif qstars is not None:
        grid, mode = list(qstars), "qstar"
    else:
        raise ParameterError("figure_sweep needs a Q* grid or a duration grid")
    if not grid:
        raise ParameterError("sweep grid is empty")

    def tau_row(tau: float) -> SweepRow:
        measure = qstar_from_dynamics(spec.with_duration(tau), ode_steps=ode_steps)
        return sweep_row(measure.qstar, spec, duration=tau)

    def qstar_row(qstar: float) -> SweepRow:
        return sweep_row(qstar, spec)

    row_fn = tau_row if mode == "tau" else qstar_row
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows: List[SweepRow] = list(pool.map(row_fn, grid))
    else:
        rows = [row_fn(x) for x in grid]
    logger.info("Oscillator sweep finished: %s rows in %s mode", len(rows), mode)

    monotonicity: Dict[str, str] = {
        column: _trend([getattr(row, column) for row in rows])
        for column in ("beta_w", "beta_df", "beta_df_plus_s")
    }
    return SweepResult(
        preset=preset,
        mode=mode,
        omega_0=spec.omega_0,
        omega_tau=spec.omega_tau,
        beta=spec.beta,
        hbar=spec.hbar,
        rows=rows,
        monotonicity=monotonicity,
    )


def oscillator_cross_check(
    spec: OscillatorSpec,
    n_trunc: int = 120,
    steps: int = 2000,
    ode_steps: int = 1000,
    n_max: int = 10,
) -> OscillatorCrossCheck:
    """Compare the truncated-Fock pipeline with the closed forms at the same Q*.

    The Fock basis is that of ``omega_0``. Results are ``trusted`` when the
    top tenth of the levels holds less than ``1e-8`` of the evolved state and
    the propagator is unitary within tolerance.
    """
    if n_max >= n_trunc:
        raise ParameterError(f"n_max {n_max} must be below n_trunc {n_trunc}")
    model = ParametricOscillatorModel(
        n_trunc=n_trunc, mass=spec.mass, hbar=spec.hbar, omega_ref=spec.omega_0
    )
    schedule = spec.schedule
    propagator = propagate(model, schedule, steps=steps, hbar=spec.hbar)
    run = ProtocolRun.from_unitary(
        evaluate(model, schedule.start),
        evaluate(model, schedule.end),
        propagator.unitary,
        spec.beta,
    )
    measure = qstar_from_dynamics(spec, ode_steps=ode_steps)
    qstar = measure.qstar

    analytic_w = avg_work(qstar, spec)
    numeric_w = mean_work(run.mf)
    occupation_analytic = [mean_occupation(n0, qstar) for n0 in range(n_max + 1)]
    levels = np.arange(run.spec_tau.n_levels)
    occupation_numeric = [float(run.transitions[n0] @ levels) for n0 in range(n_max + 1)]

    tail_start = n_trunc - max(1, int(round(TAIL_FRACTION * n_trunc)))
    tail = float(np.sum(np.real(np.diag(run.rho_tau))[tail_start:]))
    trusted = tail < TAIL_LIMIT and propagator.within_tolerance
    if not trusted:
        logger.warning(
            "Truncated-Fock results not trusted: tail occupancy %.3e, unitarity defect %.3e",
            tail,
            propagator.unitarity_defect,
        )

    return OscillatorCrossCheck(
        qstar=qstar,
        qstar_converged=measure.converged,
        n_trunc=n_trunc,
        steps=steps,
        unitarity_defect=propagator.unitarity_defect,
        mean_work_analytic=analytic_w,
        mean_work_ttm=mean_work(run.ttm),
        mean_work_mf=numeric_w,
        mean_work_relative_deviation=abs(numeric_w - analytic_w) / abs(analytic_w),
        delta_f_analytic=delta_f(spec),
        delta_f_numeric=run.delta_f,
        z_tilde_analytic=pseudo_partition(qstar, spec),
        z_tilde_numeric=run.pseudo.partition_function,
        s_rel_analytic=rel_entropy_analytic(qstar, spec),
        s_rel_numeric=run.relative_entropy,
        mean_occupation_analytic=occupation_analytic,
        mean_occupation_numeric=occupation_numeric,
        mean_occupation_max_deviation=float(
            np.max(np.abs(np.subtract(occupation_numeric, occupation_analytic)))
        ),
        tail_occupancy=tail,
        trusted=trusted,
    )


SWEEP_COLUMNS = ("qstar", "beta_w", "beta_df", "beta_df_plus_s")


def sweep_frame(result: SweepResult) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump() for row in result.rows], columns=list(SWEEP_COLUMNS))


def sweep_ordering_violation(result: SweepResult) -> float:
    """Largest violation of ``beta<W> >= beta dF + S >= beta dF`` over all rows (0 when none).

    Each row's violation is scaled by ``max(1, |beta<W>|)``.
    """
    frame = sweep_frame(result)
    scale = np.maximum(1.0, frame["beta_w"].abs())
    upper = (frame["beta_df_plus_s"] - frame["beta_w"]) / scale
    lower = (frame["beta_df"] - frame["beta_df_plus_s"]) / scale
    return float(max(0.0, upper.max(), lower.max()))
