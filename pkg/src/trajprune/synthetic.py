"""Seeded synthetic trajectory datasets.

Four motion categories with controllable proportions: stationary points,
constant-speed straight runs along +x, and constant-curvature left/right
turns. Enough structure to make redundancy-heavy datasets where uniform
down-sampling and diversity-seeking pruning behave measurably differently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ValidationError
from .model import Trajectory, Waypoint, normalize_heading

CATEGORIES = ("stationary", "straight", "left_turn", "right_turn")


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for generate_synthetic.

    mix maps category names to weights that must sum to 1. Category counts
    are the exact largest-remainder rounding of mix * count, not a random
    draw. speed_range and turn_radius_range are sampled uniformly per
    trajectory; timestep is the spacing between consecutive waypoints.
    """

    count: int
    mix: Mapping[str, float]
    points_per_trajectory: int = 10
    speed_range: tuple[float, float] = (5.0, 15.0)
    turn_radius_range: tuple[float, float] = (8.0, 30.0)
    noise_std: float = 0.0
    timestep: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ValidationError(f"count must be >= 1, got {self.count}")
        if self.points_per_trajectory < 1:
            raise ValidationError(f"points_per_trajectory must be >= 1, got {self.points_per_trajectory}")
        unknown = set(self.mix) - set(CATEGORIES)
        if unknown:
            raise ValidationError(f"unknown mix categories: {sorted(unknown)}; expected {CATEGORIES}")
        if any(w < 0 for w in self.mix.values()):
            raise ValidationError("mix weights must be non-negative")
        total = sum(self.mix.values())
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"mix weights must sum to 1, got {total}")
        for name, lo_hi in (("speed_range", self.speed_range), ("turn_radius_range", self.turn_radius_range)):
            lo, hi = lo_hi
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise ValidationError(f"{name} must be a non-empty [lo, hi] interval, got {lo_hi}")
        if self.turn_radius_range[0] <= 0:
            raise ValidationError(f"turn radii must be positive, got {self.turn_radius_range}")
        if self.noise_std < 0:
            raise ValidationError(f"noise_std must be >= 0, got {self.noise_std}")
        if self.timestep <= 0:
            raise ValidationError(f"timestep must be > 0, got {self.timestep}")


def largest_remainder_counts(mix: Mapping[str, float], total: int) -> dict[str, int]:
    """Apportion `total` among categories exactly, by largest remainder.

    Ties go to the earlier category in the canonical order, so the split is
    deterministic.
    """
    exact = [(cat, mix.get(cat, 0.0) * total) for cat in CATEGORIES]
    counts = {cat: int(math.floor(v)) for cat, v in exact}
    shortfall = total - sum(counts.values())
    remainders = sorted(
        ((v - math.floor(v), -i, cat) for i, (cat, v) in enumerate(exact)),
        reverse=True,
    )
    for _, _, cat in remainders[:shortfall]:
        counts[cat] += 1
    return counts


def _turn(rng: np.random.Generator, spec: SyntheticSpec, sign: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    v = rng.uniform(*spec.speed_range)
    radius = rng.uniform(*spec.turn_radius_range)
    theta = (v / radius) * spec.timestep * np.arange(spec.points_per_trajectory)
    x = radius * np.sin(theta)
    y = sign * radius * (1.0 - np.cos(theta))
    return x, y, sign * theta


def _make_trajectory(rng: np.random.Generator, spec: SyntheticSpec,
                     category: str, serial: int) -> Trajectory:
    k = spec.points_per_trajectory
    if category == "stationary":
        x = np.zeros(k)
        y = np.zeros(k)
        heading = np.zeros(k)
    elif category == "straight":
        v = rng.uniform(*spec.speed_range)
        x = v * spec.timestep * np.arange(k)
        y = np.zeros(k)
        heading = np.zeros(k)
    elif category == "left_turn":
        x, y, heading = _turn(rng, spec, +1.0)
    elif category == "right_turn":
        x, y, heading = _turn(rng, spec, -1.0)
    else:  # pragma: no cover - guarded by SyntheticSpec validation
        raise ValidationError(f"unknown category {category!r}")

    noise = rng.normal(0.0, spec.noise_std, size=(k, 2))
    xs = (x + noise[:, 0]).tolist()
    ys = (y + noise[:, 1]).tolist()
    hs = heading.tolist()
    points = tuple(Waypoint(xs[i], ys[i], normalize_heading(hs[i])) for i in range(k))
    return Trajectory(id=f"{category}-{serial:06d}", points=points)


def generate_synthetic(spec: SyntheticSpec) -> list[Trajectory]:
    """Generate `spec.count` trajectories, deterministically for a seed.

    Output is grouped by category in canonical order; the category is
    tagged in each id (e.g. "left_turn-000003").
    """
    rng = np.random.default_rng(spec.seed)
    counts = largest_remainder_counts(spec.mix, spec.count)
    out: list[Trajectory] = []
    for category in CATEGORIES:
        for serial in range(counts[category]):
            out.append(_make_trajectory(rng, spec, category, serial))
    return out
