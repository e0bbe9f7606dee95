"""Report writers for CSV tables and JSON summaries"""

import json
import logging
from pathlib import Path
from typing import Sequence

import pandas as pd
from sqlmodel import SQLModel

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def ensure_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_csv(frame: pd.DataFrame, path, columns: Sequence[str] | None = None) -> Path:
    """Write ``frame`` without index, floats with 17 significant digits."""
    target = Path(path)
    if columns is not None:
        frame = frame.loc[:, list(columns)]
    frame.to_csv(target, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %s (%s rows)", target, len(frame))
    return target


def write_json(record: SQLModel, path) -> Path:
    """Write a report record; floats round-trip exactly, infinity as ``Infinity``."""
    target = Path(path)
    target.write_text(json.dumps(record.model_dump(), indent=2) + "\n")
    logger.info("Wrote %s", target)
    return target
