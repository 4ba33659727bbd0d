"""CSV/JSON artifact writers shared by the experiment runner."""

from __future__ import annotations

import csv
import json
import platform
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__


def format_value(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows) -> str:
    """Write rows of numbers/strings with 17-significant-digit floats."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return str(path)


def write_manifest(path, config: dict, seed, wall_time_s, artifacts) -> str:
    manifest = {
        "schema_version": 1,
        "config": config,
        "seed": seed,
        "versions": {
            "serilin": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_time_s": wall_time_s,
        "artifacts": sorted(artifacts),
        "written_at": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
    }
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return str(path)
