import logging
from pathlib import Path

import numpy as np

from ..dependencies import get_settings
from ..errors import EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, ConfigError, QWorkError
from ..schemas.config import RunConfig
from ..services.quantum.oscillator import (
    CROSS_CHECK_TOL,
    OscillatorSpec,
    figure_sweep,
    oscillator_cross_check,
    sweep_frame,
    sweep_ordering_violation,
)
from ..utils.outputs import ensure_dir, write_csv, write_json

logger = logging.getLogger(__name__)

ORDERING_TOL = 1e-12


def _durations(text: str) -> list:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse durations {text!r}", field="oscillator.durations")


def cmd_oscillator(config: RunConfig, cross_check: bool = False) -> int:
    """
    Oscillator figure data over a Q* grid or a duration grid.

    Writes oscillator_sweep.csv (qstar, beta_w, beta_df, beta_df_plus_s) and
    oscillator_sweep.json; with ``cross_check`` also oscillator_cross_check.json.
    """
    section = config.oscillator
    status = EXIT_OK
    try:
        spec = OscillatorSpec.from_section(section)
        if section.mode == "tau":
            grid = {"durations": _durations(section.durations)}
        else:
            grid = {"qstars": np.linspace(section.qstar_min, section.qstar_max, section.points)}
        result = figure_sweep(
            spec,
            ode_steps=section.ode_steps,
            workers=get_settings().workers,
            preset=config.preset,
            **grid,
        )

        out = ensure_dir(config.output.dir)
        write_csv(sweep_frame(result), Path(out, "oscillator_sweep.csv"))
        write_json(result, Path(out, "oscillator_sweep.json"))

        violation = sweep_ordering_violation(result)
        if violation > ORDERING_TOL:
            logger.error("Sweep violates beta<W> >= beta dF + S >= beta dF by %.3e", violation)
            status = EXIT_TOLERANCE

        if cross_check:
            report = oscillator_cross_check(
                spec,
                n_trunc=section.n_trunc,
                steps=section.steps,
                ode_steps=section.ode_steps,
                n_max=section.n_max,
            )
            write_json(report, Path(out, "oscillator_cross_check.json"))
            deviation = max(report.mean_work_relative_deviation, report.mean_occupation_max_deviation)
            if not report.trusted or deviation > CROSS_CHECK_TOL:
                logger.error("Oscillator cross-check failed (deviation %.3e)", deviation)
                status = EXIT_TOLERANCE
    except QWorkError as e:
        logger.error("oscillator failed: %s", e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error("Cannot write oscillator reports: %s", e)
        return EXIT_CONFIG

    return status
