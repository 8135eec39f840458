"""Dataset, report, and histogram snapshot serialization.

Two dataset formats:

* JSONL, one trajectory per line:
  ``{"id": "...", "points": [[x, y, heading], ...]}``. The heading entry may
  be omitted per point (defaults to 0). Missing ids are synthesized as
  ``<filename>#<line>``.
* CSV with columns ``trajectory_id,t,x,y,heading``; rows are grouped by id
  (groups may be interleaved) and ordered by ``t`` within a group.

Floats are written with full precision (shortest round-tripping decimal),
so ``read(write(d)) == d`` holds bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .entropy import EntropyState, Histogram
from .errors import DatasetFormatError, ValidationError
from .model import GridSpec, Trajectory, Waypoint, normalize_heading

_FORMATS = ("jsonl", "csv")


def _pick_format(path: Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in _FORMATS:
            raise ValidationError(f"unknown dataset format {fmt!r}; expected one of {_FORMATS}")
        return fmt
    suffix = path.suffix.lower()
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    if suffix == ".csv":
        return "csv"
    raise ValidationError(
        f"cannot infer dataset format from {path.name!r}; pass format='jsonl' or 'csv'")


def _check_number(value, tid: str, field: str, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DatasetFormatError(f"{where}: trajectory {tid!r}: {field} is not a number ({value!r})")
    v = float(value)
    if not math.isfinite(v):
        raise DatasetFormatError(f"{where}: trajectory {tid!r}: non-finite {field} ({value!r})")
    return v


def trajectory_from_record(record, fallback_id: str, where: str = "<record>") -> Trajectory:
    """Build a Trajectory from one decoded JSONL record."""
    if not isinstance(record, dict):
        raise DatasetFormatError(f"{where}: expected a JSON object, got {type(record).__name__}")
    tid = record.get("id", fallback_id)
    if not isinstance(tid, str) or not tid:
        raise DatasetFormatError(f"{where}: id must be a non-empty string, got {record.get('id')!r}")
    raw_points = record.get("points")
    if not isinstance(raw_points, list) or not raw_points:
        raise DatasetFormatError(f"{where}: trajectory {tid!r}: points must be a non-empty list")
    points = []
    for entry in raw_points:
        if not isinstance(entry, (list, tuple)) or len(entry) not in (2, 3):
            raise DatasetFormatError(
                f"{where}: trajectory {tid!r}: each point must be [x, y] or [x, y, heading], got {entry!r}")
        x = _check_number(entry[0], tid, "x", where)
        y = _check_number(entry[1], tid, "y", where)
        heading = _check_number(entry[2], tid, "heading", where) if len(entry) == 3 else 0.0
        points.append(Waypoint(x, y, normalize_heading(heading)))
    return Trajectory(id=tid, points=tuple(points))


def trajectory_to_record(t: Trajectory) -> dict:
    return {"id": t.id, "points": [[w.x, w.y, w.heading] for w in t.points]}


def _read_jsonl(path: Path) -> list[Trajectory]:
    out: list[Trajectory] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetFormatError(f"{where}: invalid JSON ({e.msg})") from e
            t = trajectory_from_record(record, fallback_id=f"{path.name}#{lineno}", where=where)
            if t.id in seen:
                raise DatasetFormatError(f"{where}: duplicate trajectory id {t.id!r}")
            seen.add(t.id)
            out.append(t)
    return out


def _read_csv(path: Path) -> list[Trajectory]:
    groups: dict[str, list[tuple[float, Waypoint]]] = {}
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        required = {"trajectory_id", "t", "x", "y", "heading"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            missing = sorted(required - set(reader.fieldnames or ()))
            raise DatasetFormatError(f"{path.name}: missing CSV columns {missing}")
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name}:{lineno}"
            tid = row["trajectory_id"]
            if not tid:
                raise DatasetFormatError(f"{where}: empty trajectory_id")
            try:
                ts = float(row["t"])
                x = float(row["x"])
                y = float(row["y"])
                heading = float(row["heading"])
            except (TypeError, ValueError) as e:
                raise DatasetFormatError(f"{where}: trajectory {tid!r}: malformed numeric field ({e})") from e
            for field, v in (("t", ts), ("x", x), ("y", y), ("heading", heading)):
                if not math.isfinite(v):
                    raise DatasetFormatError(f"{where}: trajectory {tid!r}: non-finite {field}")
            groups.setdefault(tid, []).append((ts, Waypoint(x, y, normalize_heading(heading))))
    out = []
    for tid, rows in groups.items():  # dict preserves first-appearance order
        rows.sort(key=lambda r: r[0])
        out.append(Trajectory(id=tid, points=tuple(w for _, w in rows)))
    return out


def read_dataset(path: str | Path, fmt: str | None = None) -> list[Trajectory]:
    """Read a trajectory dataset, in file order."""
    path = Path(path)
    chosen = _pick_format(path, fmt)
    return _read_jsonl(path) if chosen == "jsonl" else _read_csv(path)


def iter_jsonl(path: str | Path):
    """Stream trajectories from a JSONL file without loading it whole."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetFormatError(f"{where}: invalid JSON ({e.msg})") from e
            yield trajectory_from_record(record, fallback_id=f"{path.name}#{lineno}", where=where)


def write_dataset(trajectories: Iterable[Trajectory], path: str | Path,
                  fmt: str | None = None) -> None:
    path = Path(path)
    chosen = _pick_format(path, fmt)
    if chosen == "jsonl":
        with path.open("w", encoding="utf-8") as f:
            for t in trajectories:
                f.write(json.dumps(trajectory_to_record(t)))
                f.write("\n")
    else:
        with path.open("w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["trajectory_id", "t", "x", "y", "heading"])
            for t in trajectories:
                for i, w in enumerate(t.points):
                    writer.writerow([t.id, i, repr(w.x), repr(w.y), repr(w.heading)])


def write_report(report, path: str | Path, extra: Mapping | None = None) -> None:
    """Serialize a report as a flat JSON object.

    Accepts a PruneReport (anything with to_dict) or a plain mapping; extra
    keys (run parameters, defaults) are merged in so the file is
    self-describing.
    """
    doc = dict(report.to_dict()) if hasattr(report, "to_dict") else dict(report)
    if extra:
        doc.update(extra)
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def write_histogram(state: EntropyState, grid: GridSpec, path: str | Path,
                    extra_meta: Mapping[str, str] | None = None) -> None:
    """Snapshot a histogram as CSV rows under a grid-describing header.

    Layout: a comment line ``# cell_size=<v> heading_bins=<k>`` (plus one
    comment line per extra_meta entry), a ``ix,iy,ia,count`` header, then
    one row per occupied cell in sorted order.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as f:
        f.write(f"# cell_size={grid.cell_size!r} heading_bins={grid.heading_bins}\n")
        for key, value in (extra_meta or {}).items():
            f.write(f"# {key}={value}\n")
        f.write("ix,iy,ia,count\n")
        for (ix, iy, ia), count in sorted(state.histogram.counts.items()):
            f.write(f"{ix},{iy},{ia},{count}\n")


def read_histogram(path: str | Path) -> tuple[EntropyState, GridSpec, dict[str, str]]:
    """Rebuild an EntropyState from a snapshot. Returns (state, grid, meta)."""
    path = Path(path)
    meta: dict[str, str] = {}
    counts: dict = {}
    header_seen = False
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        key, _, value = token.partition("=")
                        meta[key] = value
                continue
            if not header_seen:
                if line != "ix,iy,ia,count":
                    raise DatasetFormatError(f"{where}: expected header 'ix,iy,ia,count', got {line!r}")
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise DatasetFormatError(f"{where}: expected 4 columns, got {len(parts)}")
            try:
                ix, iy, ia, count = (int(p) for p in parts)
            except ValueError as e:
                raise DatasetFormatError(f"{where}: malformed row ({e})") from e
            if count <= 0:
                raise DatasetFormatError(f"{where}: counts must be positive, got {count}")
            counts[(ix, iy, ia)] = count
    if "cell_size" not in meta or "heading_bins" not in meta:
        raise DatasetFormatError(f"{path.name}: missing grid header comment")
    try:
        grid = GridSpec(cell_size=float(meta["cell_size"]), heading_bins=int(meta["heading_bins"]))
    except ValueError as e:
        raise DatasetFormatError(f"{path.name}: malformed grid header ({e})") from e
    return EntropyState(Histogram(counts)), grid, meta
