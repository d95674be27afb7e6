"""CSV and metadata writers.

All CSVs use ``,`` separators, ``.`` decimals, ``\\n`` line endings and
``repr`` float formatting, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import yaml

from . import __version__
from .config import ScenarioConfig

SWEEP_COLUMNS = ("delay", "update", "mode", "metric", "mean", "Q1", "Q3")
METRIC_COLUMNS = ("run", "deaths", "peak_i", "frac_days_above", "beta_integral",
                  "death_reduction", "beta_reduction")


def write_csv(path, columns, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(row)
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_scenario(path, cfg: ScenarioConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))
    return path


def write_metadata(path, cfg: ScenarioConfig, argv: list[str], extra: dict | None = None) -> Path:
    doc = {
        "package": "curveflat",
        "version": __version__,
        "command": argv,
        "scenario": cfg.to_dict(),
    }
    if extra:
        doc.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")
    return path
