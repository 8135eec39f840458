"""Entropy-maximizing dataset pruning, the random baseline, and the
streaming admission filter.

The greedy pruner works in batches: it seeds a state with a random initial
subset, scores each batch of candidates by the entropy gain they would add
to the current state (state frozen within a batch), and keeps the
highest-gain candidates. Scores never depend on the order candidates are
evaluated in, so batch scoring can run in parallel without changing the
result.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .entropy import EntropyState, Histogram, default_epsilon, kl_divergence, trajectory_delta
from .errors import ValidationError
from .model import GridSpec, Trajectory, validate_trajectories

DEFAULT_MIN_BATCH = 1024


def round_half_up(x: float) -> int:
    """Round to nearest integer, halves away from zero (for x >= 0).

    Used everywhere a retained-count is derived from a fraction, so that
    results are identical across platforms (banker's rounding is not).
    """
    return int(math.floor(x + 0.5))


def retention_target(n: int, ratio: float) -> int:
    """Number of trajectories to keep when pruning a fraction `ratio` of n."""
    return round_half_up((1.0 - ratio) * n)


def _quota(budget: int, processed: int, candidates: int) -> int:
    # floor(budget * processed / candidates + 1/2) in exact integer arithmetic
    return (2 * budget * processed + candidates) // (2 * candidates)


@dataclass(frozen=True)
class PruneParams:
    """Configuration for prune_entropy.

    ratio is the fraction of trajectories to REMOVE, in the open interval
    (0, 1). batch_size and initial_size default to max(1024, n // 1000),
    clamped to what the dataset and the retention budget allow. The seed
    feeds a PCG64 generator (numpy default_rng), so runs reproduce across
    platforms.
    """

    ratio: float
    grid: GridSpec = field(default_factory=GridSpec)
    batch_size: int | None = None
    initial_size: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.ratio < 1.0):
            raise ValidationError(f"ratio must be in the open interval (0, 1), got {self.ratio}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.initial_size is not None and self.initial_size < 1:
            raise ValidationError(f"initial_size must be >= 1, got {self.initial_size}")

    def resolve(self, n: int) -> tuple[int, int]:
        """Concrete (batch_size, initial_size) for a dataset of n trajectories."""
        target = retention_target(n, self.ratio)
        batch = self.batch_size if self.batch_size is not None else max(DEFAULT_MIN_BATCH, n // 1000)
        if self.initial_size is not None:
            n0 = self.initial_size
            if n0 > n:
                raise ValidationError(f"initial_size {n0} exceeds dataset size {n}")
            if n0 > target:
                raise ValidationError(
                    f"initial_size {n0} exceeds the retention target {target} "
                    f"(n={n}, ratio={self.ratio}); the initial subset is always kept")
        else:
            n0 = max(1, min(batch, n, target))
        if target < 1:
            raise ValidationError(
                f"ratio {self.ratio} leaves no retention budget for n={n}")
        return batch, n0


@dataclass
class PruneReport:
    """Distribution-level accounting for a pruning run."""

    entropy_original: float
    entropy_pruned: float
    kl_original_vs_pruned: float  # math.inf when pruning emptied an occupied cell
    achieved_ratio: float
    occupied_cells_original: int
    occupied_cells_pruned: int
    support_coverage: float
    n_input: int
    n_retained: int
    epsilon: float = 0.0

    def to_dict(self) -> dict:
        d = {
            "entropy_original": self.entropy_original,
            "entropy_pruned": self.entropy_pruned,
            "kl_original_vs_pruned": ("infinite" if math.isinf(self.kl_original_vs_pruned)
                                      else self.kl_original_vs_pruned),
            "achieved_ratio": self.achieved_ratio,
            "occupied_cells_original": self.occupied_cells_original,
            "occupied_cells_pruned": self.occupied_cells_pruned,
            "support_coverage": self.support_coverage,
            "n_input": self.n_input,
            "n_retained": self.n_retained,
            "epsilon": self.epsilon,
        }
        return d


@dataclass
class PruneResult:
    """Retained trajectory ids, in acceptance order, plus the report."""

    retained_ids: list[str]
    report: PruneReport


def evaluate(original: Sequence[Trajectory], retained_ids: Iterable[str],
             grid: GridSpec, epsilon: float | None = 0.0) -> PruneReport:
    """Compare the retained subset against the full dataset.

    support_coverage is the fraction of originally occupied cells that the
    pruned histogram still occupies. epsilon controls the KL diagnostic:
    0 reports divergence honestly as infinity, a positive value floors the
    pruned distribution, and None picks the half-pseudo-count default
    1 / (2 * pruned point count).
    """
    by_id = {t.id: t for t in original}
    retained = list(retained_ids)
    unknown = [rid for rid in retained if rid not in by_id]
    if unknown:
        raise ValidationError(f"retained ids not present in the dataset: {unknown[:5]!r}")

    hist_orig = Histogram.from_trajectories(original, grid)
    hist_pruned = Histogram.from_trajectories((by_id[rid] for rid in retained), grid)

    if epsilon is None:
        epsilon = default_epsilon(hist_pruned) if hist_pruned.total else 0.0
    ent_orig = EntropyState(hist_orig).entropy()
    ent_pruned = EntropyState(hist_pruned).entropy() if hist_pruned.total else 0.0
    if hist_pruned.total:
        kl = kl_divergence(hist_orig, hist_pruned, epsilon)
    else:
        kl = math.inf

    occupied_orig = hist_orig.occupied()
    covered = sum(1 for cell in hist_pruned.counts if cell in hist_orig.counts)
    coverage = covered / occupied_orig if occupied_orig else 1.0

    n = len(original)
    return PruneReport(
        entropy_original=ent_orig,
        entropy_pruned=ent_pruned,
        kl_original_vs_pruned=kl,
        achieved_ratio=1.0 - len(retained) / n if n else 0.0,
        occupied_cells_original=occupied_orig,
        occupied_cells_pruned=hist_pruned.occupied(),
        support_coverage=coverage,
        n_input=n,
        n_retained=len(retained),
        epsilon=epsilon,
    )


def _score_batch(state: EntropyState, deltas: list, threads: int) -> list[float]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # collected in candidate order, so thread count never changes output
            return list(pool.map(state.delta, deltas, chunksize=max(1, len(deltas) // (4 * threads))))
    return [state.delta(d) for d in deltas]


def prune_entropy(dataset: Sequence[Trajectory], params: PruneParams,
                  threads: int = 1, epsilon: float | None = 0.0) -> PruneResult:
    """Greedy entropy-maximizing pruning.

    One seeded shuffle defines both the initial subset and the batch order.
    The first initial_size trajectories seed the histogram and count toward
    the retention budget. Each subsequent batch is scored against the state
    as it stood when the batch started; the highest-gain candidates are
    merged in, lowest dropped. Negative-gain candidates stay eligible: in a
    redundant batch they can still be the best available.

    Per-batch keep counts follow a cumulative quota so that the final
    retained count is exactly retention_target(n, ratio) without any
    end-of-run correction.

    Deterministic given (dataset order, params); `threads` only parallelizes
    scoring and never changes the result.
    """
    validate_trajectories(dataset)
    n = len(dataset)
    if n < 1:
        raise ValidationError("dataset is empty")
    batch_size, n0 = params.resolve(n)
    if n < n0:
        raise ValidationError(f"dataset size {n} is smaller than initial_size {n0}")
    target = retention_target(n, params.ratio)
    grid = params.grid

    rng = np.random.default_rng(params.seed)
    order = rng.permutation(n)

    state = EntropyState()
    retained_ids: list[str] = []
    for idx in order[:n0]:
        t = dataset[idx]
        state.apply(trajectory_delta(t, grid))
        retained_ids.append(t.id)

    candidates = n - n0
    budget = target - n0
    processed = 0
    kept = 0
    pos = n0
    while pos < n:
        batch_idx = order[pos:pos + batch_size]
        pos += len(batch_idx)
        deltas = [trajectory_delta(dataset[i], grid) for i in batch_idx]
        gains = _score_batch(state, deltas, threads)

        processed += len(batch_idx)
        quota = _quota(budget, processed, candidates)
        keep = min(max(quota - kept, 0), len(batch_idx))
        kept += keep

        # stable sort: ties resolve to shuffled order
        ranked = sorted(range(len(batch_idx)), key=gains.__getitem__, reverse=True)
        for j in ranked[:keep]:
            state.apply(deltas[j])
            retained_ids.append(dataset[batch_idx[j]].id)

    assert len(retained_ids) == target
    report = evaluate(dataset, retained_ids, grid, epsilon)
    return PruneResult(retained_ids=retained_ids, report=report)


def prune_random(dataset: Sequence[Trajectory], ratio: float, seed: int,
                 grid: GridSpec, epsilon: float | None = 0.0) -> PruneResult:
    """Seeded uniform baseline: keep a random sample of the same size."""
    validate_trajectories(dataset)
    if not (0.0 < ratio < 1.0):
        raise ValidationError(f"ratio must be in the open interval (0, 1), got {ratio}")
    n = len(dataset)
    if n < 1:
        raise ValidationError("dataset is empty")
    target = retention_target(n, ratio)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    retained_ids = [dataset[i].id for i in order[:target]]
    report = evaluate(dataset, retained_ids, grid, epsilon)
    return PruneResult(retained_ids=retained_ids, report=report)


@dataclass(frozen=True)
class FilterPolicy:
    """Admission rule for the streaming filter.

    threshold mode accepts a trajectory iff its entropy gain is at least
    `threshold` nats. top-fraction mode tracks the gains of the last
    `window` candidates and accepts iff the current gain reaches the
    (1 - keep_fraction) quantile of that window; until the window has
    filled, everything is accepted.
    """

    mode: str = "threshold"
    threshold: float = 0.0
    keep_fraction: float = 0.5
    window: int = 256

    def __post_init__(self) -> None:
        if self.mode not in ("threshold", "top-fraction"):
            raise ValidationError(f"unknown filter mode {self.mode!r}")
        if self.mode == "threshold":
            if math.isnan(self.threshold):
                raise ValidationError("threshold must not be NaN")
        else:
            if not (0.0 < self.keep_fraction < 1.0):
                raise ValidationError(
                    f"keep_fraction must be in (0, 1), got {self.keep_fraction}")
            if self.window < 1:
                raise ValidationError(f"window must be >= 1, got {self.window}")

    @classmethod
    def threshold_at(cls, threshold: float) -> "FilterPolicy":
        return cls(mode="threshold", threshold=threshold)

    @classmethod
    def top_fraction(cls, keep_fraction: float, window: int = 256) -> "FilterPolicy":
        return cls(mode="top-fraction", keep_fraction=keep_fraction, window=window)


class StreamingFilter:
    """Online admission filter over a shared entropy state.

    Strictly sequential: every decision depends on what was accepted before
    it. The gain history (for top-fraction mode) and the histogram together
    are the full resumable state.
    """

    def __init__(self, policy: FilterPolicy, grid: GridSpec,
                 state: EntropyState | None = None,
                 history: Iterable[float] = ()):
        self.policy = policy
        self.grid = grid
        self.state = state if state is not None else EntropyState()
        self._window: deque[float] = deque(history, maxlen=policy.window)

    @property
    def history(self) -> tuple[float, ...]:
        """Recent gain values, oldest first. Persist these to resume exactly."""
        return tuple(self._window)

    def step(self, t: Trajectory) -> bool:
        """Decide on one trajectory; accepted trajectories update the state."""
        delta = trajectory_delta(t, self.grid)
        gain = self.state.delta(delta)
        policy = self.policy
        if policy.mode == "threshold":
            accept = gain >= policy.threshold
        else:
            if len(self._window) < policy.window:
                accept = True
            else:
                cutoff = float(np.quantile(np.fromiter(self._window, dtype=float),
                                           1.0 - policy.keep_fraction))
                accept = gain >= cutoff
            self._window.append(gain)
        if accept:
            self.state.apply(delta)
        return accept


def filter_step(flt: StreamingFilter, t: Trajectory) -> bool:
    """Functional alias for StreamingFilter.step."""
    return flt.step(t)
