"""CSV/JSON emitters. CSV files carry the resolved config as ``#`` comment lines."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np


def _plain(v):
    """Numpy scalars and arrays as built-in Python values."""
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"{type(v).__name__} is not JSON serializable")


def _fmt(v) -> str:
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence],
              metadata: Optional[dict] = None) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if metadata is not None:
            for line in json.dumps(metadata, indent=1, sort_keys=True, default=_plain).splitlines():
                fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_dict_rows(path: Path, rows: list[dict], metadata: Optional[dict] = None) -> Path:
    header = list(rows[0]) if rows else []
    return write_csv(path, header, ([r[k] for k in header] for r in rows), metadata)


def read_csv(path: Path) -> tuple[dict, list[dict]]:
    """Return ``(metadata, rows)``; numeric fields are converted to float."""
    meta_lines, body = [], []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                meta_lines.append(line[2:] if line.startswith("# ") else line[1:])
            elif line.strip():
                body.append(line)
    metadata = json.loads("".join(meta_lines)) if meta_lines else {}
    rows = []
    for rec in csv.DictReader(body):
        row = {}
        for k, v in rec.items():
            try:
                row[k] = float(v)
            except (TypeError, ValueError):
                row[k] = v
        rows.append(row)
    return metadata, rows


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n", encoding="utf-8")
    return path
