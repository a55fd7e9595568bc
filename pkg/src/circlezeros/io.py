"""Deterministic file output: CSV, JSONL and JSON with metadata sidecars.

Floats are written with ``repr`` so values round-trip exactly and the same
numbers always give the same bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import FormatError


def _plain(value):
    """Convert numpy scalars and arrays to JSON-native values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def dumps(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, allow_nan=True)


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_meta(path: Path, meta: dict) -> Path:
    side = sidecar_path(path)
    side.write_text(dumps(meta) + "\n", encoding="utf-8")
    return side


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], meta: dict) -> list[Path]:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])
    return [path, write_meta(path, meta)]


def write_jsonl(path: Path, records: Iterable, meta: dict) -> list[Path]:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")
    return [path, write_meta(path, meta)]


def write_json(path: Path, obj, meta: dict) -> list[Path]:
    path = Path(path)
    path.write_text(json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return [path, write_meta(path, meta)]


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def read_meta(path: Path) -> dict:
    side = sidecar_path(Path(path))
    if not side.exists():
        return {}
    try:
        return json.loads(side.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{side}: {exc}") from exc


def read_angle_sets(path: Path) -> np.ndarray:
    """Angle rows from a JSONL file of lists (or objects with an ``angles`` key)."""
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
            if isinstance(rec, dict):
                rec = rec.get("angles")
            if not isinstance(rec, list) or not all(isinstance(v, (int, float)) for v in rec):
                raise FormatError(f"{path}:{lineno}: expected a list of angles")
            rows.append(rec)
    if not rows:
        raise FormatError(f"{path}: no angle sets")
    if len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: angle sets have different lengths")
    return np.array(rows, dtype=float)


def read_csv_column(path: Path, names: Sequence[str] = ("unfolded_gap", "gap", "value")) -> np.ndarray:
    """One numeric column from a CSV file, picked by header name (else the first)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration as exc:
            raise FormatError(f"{path}: empty file") from exc
        col = next((header.index(n) for n in names if n in header), 0)
        try:
            values = [float(row[col]) for row in reader if row]
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}: {exc}") from exc
    if not values:
        raise FormatError(f"{path}: no data rows")
    return np.array(values)
