"""
Helpers shared by the command modules.
"""
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List

import pandas as pd
import yaml

from hydrodeep.config.settings import settings
from hydrodeep.schemas.metrics import MetricReport
from hydrodeep.schemas.run import RunConfig
from hydrodeep.utils.exceptions import ConfigError, HydroDeepError

logger = logging.getLogger(__name__)

FAILED = "FAILED"


@contextmanager
def guarded_output(out_dir: Path, run_cfg: RunConfig) -> Iterator[Path]:
    """
    Prepare ``out_dir`` for a command and mark it if the command fails.

    The effective config and tool version are written first; a stale
    ``FAILED`` file is removed and a new one holding the error is written
    when the body raises.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sentinel = out_dir / FAILED
    if sentinel.exists():
        sentinel.unlink()
    run_cfg.write_provenance(out_dir)
    try:
        yield out_dir
    except Exception as e:
        message = e.message if isinstance(e, HydroDeepError) else str(e)
        sentinel.write_text(f"{type(e).__name__}: {message}\n", encoding="utf-8")
        logger.error("Command failed, outputs in %s are incomplete", out_dir)
        raise


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    """Write a CSV table with the configured float format."""
    frame.to_csv(path, index=False, float_format=settings.float_format)
    return path


def write_report(report: MetricReport, path: Path) -> Path:
    """Write the fixed-key metric record as YAML."""
    with open(path, "w", encoding="utf-8") as handle:
        yaml.safe_dump(report.to_record(), handle, sort_keys=False)
    return path


def format_report(report: MetricReport) -> str:
    """One-line rendering of a report for the terminal."""
    return f"nse={report.nse:.4f} pbias_pct={report.pbias:.2f} rsr={report.rsr:.4f} n={report.n}"


def parse_int_list(text: str) -> List[int]:
    """
    Parse ``"3..11"`` (inclusive range) or ``"3,5,7"``.

    Raises:
        ConfigError: If the text is neither form.
    """
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split("..", 1))
            values = list(range(lo, hi + 1))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse integer list {text!r}")
    if not values:
        raise ConfigError(f"empty integer list {text!r}")
    return values


def split_list(text: str) -> List[str]:
    """Split a comma-separated option value."""
    return [p.strip() for p in text.split(",") if p.strip()]
