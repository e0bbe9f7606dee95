"""Protocol service - builds models and schedules from a run config and runs the pipeline."""

import logging
import math
from typing import List, Tuple

import numpy as np

from ..errors import ConfigError
from ..schemas.config import RunConfig, ScheduleSection
from .quantum.hamiltonians import (
    CustomModel,
    DriveSchedule,
    HamiltonianModel,
    ParametricOscillatorModel,
    TwoLevelModel,
    evaluate,
)
from .quantum.propagation import PropagatorResult, propagate, propagate_converged
from .quantum.work import ProtocolRun

logger = logging.getLogger(__name__)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian matrix with spectrum of order ``scale``."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / (2 * math.sqrt(dim))


def parse_knots(text: str) -> List[Tuple[float, float]]:
    """``"0:1, 0.5:1.5, 1:2"`` -> ``[(0, 1), (0.5, 1.5), (1, 2)]``."""
    knots = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            t, v = item.split(":")
            knots.append((float(t), float(v)))
        except ValueError:
            raise ConfigError(f"knot {item!r} is not of the form time:value", field="schedule.knots")
    return knots


def build_schedule(section: ScheduleSection) -> DriveSchedule:
    if section.shape == "tabulated":
        if not section.knots:
            raise ConfigError("tabulated schedule needs knots", field="schedule.knots")
        return DriveSchedule.tabulated(parse_knots(section.knots))
    return DriveSchedule(
        duration=section.duration,
        shape=section.shape,
        start=section.start,
        end=section.end,
    )


def _load_custom(path: str) -> CustomModel:
    try:
        with np.load(path) as data:
            lambdas, hamiltonians = data["lambdas"], data["hamiltonians"]
    except OSError as e:
        raise ConfigError(f"cannot read custom model: {e}", field="model.path")
    except KeyError as e:
        raise ConfigError(f"custom model file lacks array {e}", field="model.path")
    return CustomModel(lambdas=lambdas, hamiltonians=hamiltonians)


def _check_lambda_range(model: CustomModel, schedule: DriveSchedule) -> CustomModel:
    low, high = schedule.bounds
    if low < model.lambdas[0] or high > model.lambdas[-1]:
        raise ConfigError(
            f"schedule spans lambda in [{low}, {high}], model is tabulated on "
            f"[{model.lambdas[0]}, {model.lambdas[-1]}]",
            field="schedule",
        )
    return model


def build_model(config: RunConfig, schedule: DriveSchedule) -> HamiltonianModel:
    """Hamiltonian family selected by ``[model] kind``."""
    section = config.model
    if section.kind == "two_level":
        return TwoLevelModel(delta=section.delta, axis=section.axis)
    if section.kind == "parametric_oscillator":
        return ParametricOscillatorModel(
            n_trunc=section.n_trunc,
            mass=section.mass,
            hbar=config.run.hbar,
            omega_ref=section.omega_ref or schedule.start,
        )
    if section.kind == "custom":
        return _check_lambda_range(_load_custom(section.path), schedule)
    # random endpoints on lambda in [0, 1]
    rng = np.random.default_rng(config.run.seed)
    h_start = random_hermitian(rng, section.dim, section.scale)
    h_end = random_hermitian(rng, section.dim, section.scale)
    return _check_lambda_range(CustomModel.linear(h_start, h_end), schedule)


def run_protocol(
    model: HamiltonianModel,
    schedule: DriveSchedule,
    beta: float,
    hbar: float = 1.0,
    steps: int = 2000,
    tolerance: float = 1e-9,
    auto_converge: bool = False,
) -> Tuple[ProtocolRun, PropagatorResult]:
    """Propagate ``model`` along ``schedule`` and attach the thermal references."""
    if auto_converge:
        propagator = propagate_converged(model, schedule, steps=steps, hbar=hbar, tolerance=tolerance)
    else:
        propagator = propagate(model, schedule, steps=steps, hbar=hbar, tolerance=tolerance)
    logger.info(
        "Propagation finished: dim %s, %s steps, unitarity defect %.3e",
        model.dim,
        propagator.steps,
        propagator.unitarity_defect,
    )
    run = ProtocolRun.from_unitary(
        evaluate(model, schedule.start),
        evaluate(model, schedule.end),
        propagator.unitary,
        beta,
    )
    return run, propagator


def run_from_config(config: RunConfig) -> Tuple[ProtocolRun, PropagatorResult]:
    schedule = build_schedule(config.schedule)
    model = build_model(config, schedule)
    return run_protocol(
        model,
        schedule,
        beta=config.run.beta,
        hbar=config.run.hbar,
        steps=config.run.steps,
        tolerance=config.run.tolerance,
        auto_converge=config.run.auto_converge,
    )
