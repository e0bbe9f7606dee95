import logging
from pathlib import Path

from ..dependencies import get_settings
from ..errors import EXIT_CONFIG, EXIT_OK, EXIT_TOLERANCE, QWorkError
from ..schemas.config import RunConfig
from ..services.verify import verify_suite
from ..utils.outputs import ensure_dir, write_json

logger = logging.getLogger(__name__)


def cmd_verify(config: RunConfig) -> int:
    """Identity suite; verify_report.json is written even when a check fails."""
    try:
        report = verify_suite(config, workers=get_settings().workers)
        write_json(report, Path(ensure_dir(config.output.dir), "verify_report.json"))
    except QWorkError as e:
        logger.error("verify failed: %s", e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error("Cannot write verify reports: %s", e)
        return EXIT_CONFIG

    if not report.passed:
        return EXIT_TOLERANCE
    return EXIT_OK
