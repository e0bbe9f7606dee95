import logging
from pathlib import Path

from ..errors import EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, QWorkError
from ..schemas.config import RunConfig
from ..services.protocol import run_from_config
from ..services.quantum.work import ttm_summary
from ..utils.outputs import ensure_dir, write_csv, write_json

logger = logging.getLogger(__name__)


def cmd_ttm(config: RunConfig) -> int:
    """
    Two-time measurement pipeline.

    Writes ttm_distribution.csv (w, prob) and ttm_summary.json. Returns 1 when
    the propagator misses its unitarity tolerance.
    """
    try:
        run, propagator = run_from_config(config)
        summary = ttm_summary(run, propagator)

        out = ensure_dir(config.output.dir)
        write_csv(run.ttm.to_frame(), Path(out, "ttm_distribution.csv"))
        write_json(summary, Path(out, "ttm_summary.json"))
    except QWorkError as e:
        logger.error("ttm failed: %s", e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error("Cannot write ttm reports: %s", e)
        return EXIT_CONFIG

    if not propagator.within_tolerance:
        logger.error("ttm result flagged: %s", propagator.advice)
        return EXIT_TOLERANCE
    return EXIT_OK
