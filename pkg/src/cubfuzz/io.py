"""CSV ingestion and report writing."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ratings import RatingSample

NA = "NA"
MISSING = 0
PRECISION = 6


@dataclass(frozen=True)
class RatingsTable:
    """n x K ratings; missing cells are stored as 0."""

    item_names: tuple
    values: np.ndarray
    m: int

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return len(self.item_names)

    def item_sample(self, k: int | str) -> RatingSample:
        """All available ratings of one item (missing cells dropped)."""
        if isinstance(k, str):
            k = self.item_names.index(k)
        col = self.values[:, k]
        col = col[col != MISSING]
        if col.size == 0:
            raise ValueError(f"item {self.item_names[k]!r} has no ratings")
        return RatingSample(col, self.m)

    def complete_rows(self) -> np.ndarray:
        return self.values[np.all(self.values != MISSING, axis=1)]

    def reversed(self) -> "RatingsTable":
        v = np.where(self.values == MISSING, MISSING, self.m + 1 - self.values)
        return RatingsTable(self.item_names, v, self.m)


def ingest_csv(path, m: int) -> RatingsTable:
    """Read a header-plus-rows CSV of integer ratings in 1..m, ``NA`` for missing."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or any(h == "" for h in header):
        raise ValueError(f"{path}: malformed header {rows[0]!r}")
    if len(set(header)) != len(header):
        raise ValueError(f"{path}: duplicate item names in header")
    body = rows[1:]
    if not body:
        raise ValueError(f"{path}: no data rows")
    values = np.zeros((len(body), len(header)), dtype=np.int64)
    for i, row in enumerate(body):
        line = i + 2
        if len(row) != len(header):
            raise ValueError(f"{path}: line {line} has {len(row)} cells, header has {len(header)}")
        for j, cell in enumerate(row):
            tok = cell.strip()
            if tok == NA:
                continue
            try:
                v = int(tok)
            except ValueError:
                raise ValueError(f"{path}: line {line}, column {header[j]!r}: malformed cell {cell!r}") from None
            if not 1 <= v <= m:
                raise ValueError(
                    f"{path}: line {line}, column {header[j]!r}: value {cell!r} outside 1..{m}"
                )
            values[i, j] = v
    return RatingsTable(tuple(header), values, m)


def write_ratings_csv(path, item_names: Sequence[str], columns: Sequence[np.ndarray]):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(item_names)
        for row in zip(*columns):
            w.writerow([NA if v == MISSING else int(v) for v in row])


def fmt(v):
    """Cell text: floats at fixed precision, None/NaN as empty."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{v:.{PRECISION}f}"
    return str(v)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_table(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return None if not math.isfinite(obj) else round(float(obj), PRECISION)
    return obj


def write_json(path, doc: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(doc), indent=2) + "\n", encoding="utf-8")


def read_ifs_csv(path) -> np.ndarray:
    """n x 3 array of (mu, nu, u); a missing ``u`` column is filled as 1 - mu - nu."""
    rows = read_table(path)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    cols = rows[0].keys()
    if not {"mu", "nu"} <= set(cols):
        raise ValueError(f"{path}: need columns mu, nu (and optionally u)")
    out = []
    for i, r in enumerate(rows):
        try:
            mu, nu = float(r["mu"]), float(r["nu"])
            u = float(r["u"]) if r.get("u") not in (None, "") else 1.0 - mu - nu
        except ValueError:
            raise ValueError(f"{path}: line {i + 2}: malformed cell in {r!r}") from None
        out.append((mu, nu, u))
    return np.asarray(out)
