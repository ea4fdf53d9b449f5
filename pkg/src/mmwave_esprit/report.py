"""CSV/JSON emission of metrics records."""

from __future__ import annotations

import csv
import dataclasses
import json
import subprocess
from pathlib import Path

from . import __version__
from .config import SystemConfig
from .simulation import MetricsRecord

CSV_FIELDS = ("scheme", "snr_db", "n_paths", "n_trials", "nmse_db", "ase_bps_hz",
              "ber", "pilot_overhead", "failure_rate")


def format_float(x: float) -> str:
    return format(float(x), ".10g")


def version_string() -> str:
    """``git describe`` of the source checkout, falling back to the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        return __version__
    desc = out.stdout.strip()
    return f"{__version__}+g{desc}" if out.returncode == 0 and desc else __version__


def format_cell(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def write_csv(records: list[MetricsRecord], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for rec in records:
            writer.writerow([format_cell(getattr(rec, name)) for name in CSV_FIELDS])
    return path


def records_to_json(records: list[MetricsRecord], config: SystemConfig) -> dict:
    rows = []
    for rec in records:
        row = dataclasses.asdict(rec)
        rows.append({k: (float(format_float(v)) if isinstance(v, float) else v)
                     for k, v in row.items()})
    return {"version": version_string(), "config": config.to_dict(), "records": rows}


def write_json(records: list[MetricsRecord], config: SystemConfig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # NaN (all trials failed) is emitted as null
    payload = records_to_json(records, config)
    for row in payload["records"]:
        for k, v in row.items():
            if isinstance(v, float) and v != v:
                row[k] = None
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path
