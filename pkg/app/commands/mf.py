import logging
from pathlib import Path

from ..errors import EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, QWorkError
from ..schemas.config import RunConfig
from ..services.protocol import run_from_config
from ..services.quantum.work import mf_summary
from ..utils.outputs import ensure_dir, write_csv, write_json

logger = logging.getLogger(__name__)

DIAGNOSTIC_COLUMNS = ("index", "level", "initial_energy", "evolved_energy", "w", "prob")


def cmd_mf(config: RunConfig) -> int:
    """
    Measurement-free pipeline.

    Writes mf_distribution.csv with merged atoms, mf_work_values.csv with one
    unmerged row per initial basis vector, and mf_summary.json.
    """
    try:
        run, propagator = run_from_config(config)
        summary = mf_summary(run, propagator)

        out = ensure_dir(config.output.dir)
        write_csv(run.mf.to_frame(), Path(out, "mf_distribution.csv"))
        write_csv(run.mf_diagnostics(), Path(out, "mf_work_values.csv"), columns=DIAGNOSTIC_COLUMNS)
        write_json(summary, Path(out, "mf_summary.json"))
    except QWorkError as e:
        logger.error("mf failed: %s", e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error("Cannot write mf reports: %s", e)
        return EXIT_CONFIG

    if not propagator.within_tolerance:
        logger.error("mf result flagged: %s", propagator.advice)
        return EXIT_TOLERANCE
    return EXIT_OK
