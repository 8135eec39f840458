"""Trajectory primitives and grid discretization.

Everything here is an immutable value; the functions are pure and safe to
call from multiple threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


def normalize_heading(heading: float) -> float:
    """Wrap a heading into [-pi, pi).

    Idempotent: values already inside the interval are returned unchanged
    (bit for bit), which keeps serialization round-trips exact.
    """
    if -math.pi <= heading < math.pi:
        return heading
    return (heading + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True, slots=True)
class Waypoint:
    """Ego-centric pose sample: position in meters, heading in radians.

    Heading is expected to be normalized into [-pi, pi); readers and the
    synthetic generator take care of that. Finiteness is checked where
    waypoints enter the system, not on every construction.
    """

    x: float
    y: float
    heading: float = 0.0


@dataclass(frozen=True, slots=True)
class Trajectory:
    """An ordered, non-empty sequence of waypoints with an opaque id.

    By convention the first waypoint is the origin pose (0, 0, 0). That is
    not enforced (real exports may drop it); use origin_pose_violations to
    audit a dataset.
    """

    id: str
    points: tuple[Waypoint, ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, slots=True)
class GridSpec:
    """Discretization of the trajectory plane (and optionally heading).

    cell_size is the side of the square spatial cells, in meters.
    heading_bins = 0 means a pure 2D projection (heading ignored);
    heading_bins = k > 0 partitions [-pi, pi) into k equal bins.
    """

    cell_size: float = 0.5
    heading_bins: int = 0

    def __post_init__(self) -> None:
        if not (isinstance(self.cell_size, (int, float)) and math.isfinite(self.cell_size)):
            raise ValidationError(f"cell_size must be a finite number, got {self.cell_size!r}")
        if self.cell_size <= 0:
            raise ValidationError(f"cell_size must be > 0, got {self.cell_size}")
        if not isinstance(self.heading_bins, int) or self.heading_bins < 0:
            raise ValidationError(f"heading_bins must be a non-negative integer, got {self.heading_bins!r}")


class CellIndex(NamedTuple):
    """Integer grid cell. Compares and hashes like a plain (ix, iy, ia) tuple."""

    ix: int
    iy: int
    ia: int = 0


def cell_index(w: Waypoint, grid: GridSpec) -> CellIndex:
    """Map a waypoint to its grid cell.

    Cells are half-open [i * cell_size, (i + 1) * cell_size) so the origin
    pose lands in cell (0, 0). The grid is unbounded; ix and iy may be any
    integer. With heading_bins = k > 0, ia is the heading bin in [0, k),
    clamped at the top edge so heading values that round up to pi still fall
    in the last bin.
    """
    x, y = w.x, w.y
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(w.heading)):
        field = "x" if not math.isfinite(x) else ("y" if not math.isfinite(y) else "heading")
        raise ValidationError(f"non-finite waypoint coordinate: {field}={getattr(w, field)!r}")
    cell = grid.cell_size
    bins = grid.heading_bins
    if bins > 0:
        ia = int((w.heading + math.pi) * bins // TWO_PI)
        if ia >= bins:
            ia = bins - 1
        elif ia < 0:
            ia = 0
    else:
        ia = 0
    return CellIndex(int(x // cell), int(y // cell), ia)


def discretize(t: Trajectory, grid: GridSpec) -> list[CellIndex]:
    """Return one cell per waypoint, multiplicity preserved."""
    if not t.points:
        raise ValidationError(f"trajectory {t.id!r} has no waypoints")
    return [cell_index(w, grid) for w in t.points]


def validate_trajectory(t: Trajectory) -> None:
    """Raise ValidationError unless every waypoint satisfies the invariants."""
    if not isinstance(t.id, str) or not t.id:
        raise ValidationError(f"trajectory id must be a non-empty string, got {t.id!r}")
    if not t.points:
        raise ValidationError(f"trajectory {t.id!r} has no waypoints")
    for i, w in enumerate(t.points):
        for field in ("x", "y", "heading"):
            v = getattr(w, field)
            if not (isinstance(v, (int, float)) and math.isfinite(v)):
                raise ValidationError(f"trajectory {t.id!r}, point {i}: non-finite {field}={v!r}")


def validate_trajectories(trajectories: Sequence[Trajectory]) -> None:
    """Validate every trajectory and reject duplicate ids."""
    seen: set[str] = set()
    for t in trajectories:
        if t.id in seen:
            raise ValidationError(f"duplicate trajectory id {t.id!r}")
        seen.add(t.id)
        validate_trajectory(t)


def origin_pose_violations(trajectories: Iterable[Trajectory], tol: float = 1e-9) -> list[str]:
    """Ids of trajectories whose first waypoint is not the origin pose.

    Advisory only; the origin-pose convention is not enforced anywhere.
    """
    bad = []
    for t in trajectories:
        if not t.points:
            bad.append(t.id)
            continue
        w = t.points[0]
        if abs(w.x) > tol or abs(w.y) > tol or abs(w.heading) > tol:
            bad.append(t.id)
    return bad
