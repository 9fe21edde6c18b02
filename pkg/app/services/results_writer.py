"""
Results Writer - result CSV and timing JSON
"""
import json
import logging
from pathlib import Path
from typing import Tuple, Union

from app.core.config import settings
from app.core.exceptions import ZoneSimError
from app.models.results import SimulationResult, TimingReport

logger = logging.getLogger(__name__)


class ResultWriteError(ZoneSimError):
    """Result files cannot be written"""


def write_results(
    result: SimulationResult, timing: TimingReport, path: Union[str, Path]
) -> Tuple[Path, Path]:
    """
    Write <label>.csv and <label>_timing.json into the directory `path`

    Numbers are written with a fixed number of significant digits so two runs
    of the same project produce identical CSV files.
    """
    directory = Path(path)
    csv_path = directory / f"{result.label}.csv"
    json_path = directory / f"{result.label}_timing.json"
    try:
        directory.mkdir(parents=True, exist_ok=True)
        result.frame.to_csv(
            csv_path,
            index=False,
            float_format=f"%.{settings.CSV_SIGNIFICANT_DIGITS}g",
            lineterminator="\n",
        )
        json_path.write_text(json.dumps(timing.to_dict(), indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise ResultWriteError(f"Cannot write results to {directory}: {e}")
    logger.info(f"Wrote {len(result)} row(s) to {csv_path}")
    return csv_path, json_path
