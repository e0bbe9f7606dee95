import configparser
import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional

from dotenv import load_dotenv
from pydantic import ValidationError
from sqlmodel import Field, SQLModel

from .errors import ConfigError
from .schemas.config import RunConfig

logger = logging.getLogger(__name__)

load_dotenv()

SECTIONS = ("model", "schedule", "run", "oscillator", "verify", "output")

# Named oscillator parameter sets: upward and downward frequency ramps
PRESETS: Dict[str, Dict[str, float]] = {
    "fig1": {
        "hbar": 1.0, "beta": 1.0, "omega_0": 1.0, "omega_tau": 2.0, "qstar_min": 1.0, "qstar_max": 3.0,
    },
    "fig2": {
        "hbar": 1.0, "beta": 1.0, "omega_0": 2.0, "omega_tau": 1.0, "qstar_min": 1.0, "qstar_max": 3.0,
    },
}


class Settings(SQLModel):
    """Process-wide defaults taken from the environment"""

    log_level: str = "INFO"
    out_dir: str = "out"
    workers: int = Field(default=1, ge=1)


@lru_cache
def get_settings() -> Settings:
    try:
        return Settings.model_validate(
            {
                "log_level": os.environ.get("QWORK_LOG_LEVEL", "INFO").upper(),
                "out_dir": os.environ.get("QWORK_OUT_DIR", "out"),
                "workers": os.environ.get("QWORK_WORKERS", "1"),
            }
        )
    except ValidationError as e:
        raise ConfigError(f"invalid environment: {e.errors()[0]['msg']}", field="QWORK_WORKERS")


def _key_lines(text: str) -> Dict[tuple, int]:
    """Line number of every ``section.key`` (and section header) in an INI text."""
    lines: Dict[tuple, int] = {}
    section = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            lines.setdefault((section, None), number)
            continue
        for sep in ("=", ":"):
            if sep in line and section is not None:
                key = line.split(sep, 1)[0].strip().lower()
                lines.setdefault((section, key), number)
                break
    return lines


def _parse_text(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside of any section", line=e.lineno)
    except configparser.DuplicateSectionError as e:
        raise ConfigError("duplicate section", field=e.section, line=e.lineno)
    except configparser.DuplicateOptionError as e:
        raise ConfigError("duplicate key", field=f"{e.section}.{e.option}", line=e.lineno)
    except configparser.ParsingError as e:
        line, content = e.errors[0]
        raise ConfigError(f"cannot parse {content.strip()!r}", line=line)
    return parser


def load_run_config(
    path: Optional[str] = None,
    out: Optional[str] = None,
    seed: Optional[int] = None,
    preset: Optional[str] = None,
) -> RunConfig:
    """Read a sectioned run-config file and apply command-line overrides.

    Every problem is raised as :class:`ConfigError` naming ``section.key`` and,
    when the value came from the file, its line number.
    """
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e.strerror}", field="--config")
    parser = _parse_text(text, source=path or "<defaults>")
    lines = _key_lines(text)

    raw: Dict[str, Dict[str, str]] = {}
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]", field=section, line=lines.get((section, None)))
        fields = RunConfig.model_fields[section].annotation.model_fields
        for key in parser.options(section):
            if key not in fields:
                raise ConfigError("unknown key", field=f"{section}.{key}", line=lines.get((section, key)))
        raw[section] = dict(parser.items(section))

    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}, expected one of {sorted(PRESETS)}", field="--preset")
        raw.setdefault("oscillator", {}).update(PRESETS[preset])
        raw["preset"] = preset
    if seed is not None:
        if seed < 0:
            raise ConfigError("seed must be non-negative", field="--seed")
        raw.setdefault("run", {})["seed"] = seed
    raw.setdefault("output", {})
    if out is not None:
        raw["output"]["dir"] = out
    elif not raw["output"].get("dir"):
        raw["output"]["dir"] = get_settings().out_dir

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as e:
        error = e.errors()[0]
        loc = [str(part) for part in error["loc"]]
        section = loc[0]
        key = loc[1] if len(loc) > 1 else None
        field = f"{section}.{key}" if key else section
        raise ConfigError(error["msg"], field=field, line=lines.get((section, key)))

    logger.debug("Loaded run config from %s", path or "defaults")
    return config
