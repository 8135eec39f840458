"""Entropy-maximizing pruning for large trajectory datasets.

Prunes redundant trajectories from driving-style datasets by greedily
keeping the ones that add the most information entropy to a discretized
occupancy histogram, with a random baseline, KL-divergence diagnostics, a
streaming admission filter, and a synthetic data generator. All entropies
are in nats.
"""

from .entropy import (
    CellDelta,
    EntropyState,
    Histogram,
    build_histogram,
    default_epsilon,
    entropy,
    entropy_of_counts,
    kl_divergence,
    trajectory_delta,
)
from .errors import DatasetFormatError, ValidationError
from .estimators import EntropyPruner, RandomPruner
from .model import (
    CellIndex,
    GridSpec,
    Trajectory,
    Waypoint,
    cell_index,
    discretize,
    normalize_heading,
    origin_pose_violations,
    validate_trajectories,
    validate_trajectory,
)
from .pruning import (
    FilterPolicy,
    PruneParams,
    PruneReport,
    PruneResult,
    StreamingFilter,
    evaluate,
    filter_step,
    prune_entropy,
    prune_random,
    retention_target,
    round_half_up,
)
from .synthetic import CATEGORIES, SyntheticSpec, generate_synthetic, largest_remainder_counts

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES",
    "CellDelta",
    "CellIndex",
    "DatasetFormatError",
    "EntropyPruner",
    "EntropyState",
    "FilterPolicy",
    "GridSpec",
    "Histogram",
    "PruneParams",
    "PruneReport",
    "PruneResult",
    "RandomPruner",
    "StreamingFilter",
    "SyntheticSpec",
    "Trajectory",
    "ValidationError",
    "Waypoint",
    "build_histogram",
    "cell_index",
    "default_epsilon",
    "discretize",
    "entropy",
    "entropy_of_counts",
    "evaluate",
    "filter_step",
    "generate_synthetic",
    "kl_divergence",
    "largest_remainder_counts",
    "normalize_heading",
    "origin_pose_violations",
    "prune_entropy",
    "prune_random",
    "retention_target",
    "round_half_up",
    "trajectory_delta",
    "validate_trajectories",
    "validate_trajectory",
]
