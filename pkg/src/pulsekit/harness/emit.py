"""CSV emission with reproducible formatting.

Floats are written with ``repr`` (shortest round-trip form) and rows end in
``\\n`` regardless of platform, so identical data always produces identical
bytes.  The first line of every file is a ``# config_hash=...`` comment tying
the artifact to the configuration that produced it.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

__all__ = ["format_cell", "write_csv"]


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows, config_hash: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    return path
