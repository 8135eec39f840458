"""Sparse point-count histograms with incremental entropy.

The entropy of a histogram with cell counts N_i and total N is

    H = -sum_i (N_i / N) * ln(N_i / N) = ln N - (sum_i N_i * ln N_i) / N

All entropies and divergences are in nats (natural log). The log base only
rescales values and never changes which of two candidates has the larger
entropy gain, so greedy selection is base-invariant.

EntropyState caches the weighted log sum (sum_i N_i * ln N_i) so that the
entropy change from adding a trajectory costs O(cells touched) instead of
O(occupied cells).
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Sequence

from .errors import ValidationError
from .model import CellIndex, GridSpec, Trajectory, discretize

# Additive float error accumulates over millions of in-place updates; an
# occasional exact rebuild of the cached sum keeps entropy honest.
DEFAULT_REBUILD_INTERVAL = 1 << 20

# One histogram update: list of (cell, increment) pairs, cells distinct,
# increments >= 1. Produced by trajectory_delta.
CellDelta = Sequence[tuple[CellIndex, int]]

log = math.log


def trajectory_delta(t: Trajectory, grid: GridSpec) -> list[tuple[CellIndex, int]]:
    """Group a trajectory's waypoints into (cell, count) pairs."""
    return list(Counter(discretize(t, grid)).items())


class Histogram:
    """Sparse map from grid cells to positive point counts.

    Cells with zero count are never stored. Counts stay exact integers;
    probabilities are only formed at evaluation time.
    """

    __slots__ = ("counts", "total")

    def __init__(self, counts: dict[CellIndex, int] | None = None):
        self.counts: dict[CellIndex, int] = dict(counts) if counts else {}
        self.total: int = sum(self.counts.values())

    @classmethod
    def from_trajectories(cls, trajectories: Iterable[Trajectory], grid: GridSpec) -> "Histogram":
        counter: Counter = Counter()
        for t in trajectories:
            counter.update(discretize(t, grid))
        h = cls()
        h.counts = dict(counter)
        h.total = sum(h.counts.values())
        return h

    def occupied(self) -> int:
        """Number of cells with a positive count."""
        return len(self.counts)

    def copy(self) -> "Histogram":
        h = Histogram()
        h.counts = dict(self.counts)
        h.total = self.total
        return h

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Histogram):
            return NotImplemented
        return self.counts == other.counts

    def __repr__(self) -> str:
        return f"Histogram(cells={len(self.counts)}, total={self.total})"


def entropy_of_counts(counts: Iterable[int]) -> float:
    """Entropy in nats of a bare count collection. Empty or all-zero gives 0."""
    total = 0
    wls = 0.0
    for c in counts:
        if c > 0:
            total += c
            wls += c * log(c)
    if total == 0:
        return 0.0
    return log(total) - wls / total


class EntropyState:
    """A histogram plus the cached weighted log sum.

    Supports one writer or many concurrent readers, never both: entropy()
    and delta() are read-only and may run from several threads against a
    shared state, apply() needs exclusive access.
    """

    __slots__ = ("histogram", "weighted_log_sum", "rebuild_interval", "_applies_since_rebuild")

    def __init__(self, histogram: Histogram | None = None,
                 rebuild_interval: int = DEFAULT_REBUILD_INTERVAL):
        self.histogram = histogram if histogram is not None else Histogram()
        self.rebuild_interval = rebuild_interval
        self._applies_since_rebuild = 0
        self.rebuild()

    @property
    def total(self) -> int:
        return self.histogram.total

    def rebuild(self) -> None:
        """Recompute the cached sum exactly from the stored counts."""
        self.weighted_log_sum = sum(c * log(c) for c in self.histogram.counts.values())
        self._applies_since_rebuild = 0

    def entropy(self) -> float:
        """Entropy in nats; 0 for an empty histogram."""
        total = self.histogram.total
        if total == 0:
            return 0.0
        return log(total) - self.weighted_log_sum / total

    def delta(self, delta: CellDelta) -> float:
        """Entropy change from applying `delta`, without mutating anything.

        May be negative: piling more mass onto an already dominant cell
        lowers the normalized entropy.
        """
        counts = self.histogram.counts
        total = self.histogram.total
        wls = self.weighted_log_sum
        new_wls = wls
        added = 0
        for cell, inc in delta:
            n = counts.get(cell, 0)
            m = n + inc
            new_wls += m * log(m) - (n * log(n) if n else 0.0)
            added += inc
        new_total = total + added
        before = 0.0 if total == 0 else log(total) - wls / total
        after = 0.0 if new_total == 0 else log(new_total) - new_wls / new_total
        return after - before

    def apply(self, delta: CellDelta) -> "EntropyState":
        """Merge `delta` into the state in place and return the state."""
        counts = self.histogram.counts
        added = 0
        wls = self.weighted_log_sum
        for cell, inc in delta:
            n = counts.get(cell, 0)
            m = n + inc
            counts[cell] = m
            wls += m * log(m) - (n * log(n) if n else 0.0)
            added += inc
        self.weighted_log_sum = wls
        self.histogram.total += added
        self._applies_since_rebuild += 1
        if self._applies_since_rebuild >= self.rebuild_interval:
            self.rebuild()
        return self

    def copy(self) -> "EntropyState":
        dup = EntropyState.__new__(EntropyState)
        dup.histogram = self.histogram.copy()
        dup.weighted_log_sum = self.weighted_log_sum
        dup.rebuild_interval = self.rebuild_interval
        dup._applies_since_rebuild = self._applies_since_rebuild
        return dup

    def __repr__(self) -> str:
        return f"EntropyState(cells={self.histogram.occupied()}, total={self.total})"


def build_histogram(trajectories: Iterable[Trajectory], grid: GridSpec,
                    rebuild_interval: int = DEFAULT_REBUILD_INTERVAL) -> EntropyState:
    """Accumulate every trajectory's waypoints into a fresh EntropyState.

    The result does not depend on input order.
    """
    return EntropyState(Histogram.from_trajectories(trajectories, grid),
                        rebuild_interval=rebuild_interval)


def entropy(state: EntropyState) -> float:
    """Entropy in nats of the state's histogram."""
    return state.entropy()


def default_epsilon(q: Histogram) -> float:
    """Half a pseudo-count: the default floor for smoothed KL diagnostics."""
    if q.total <= 0:
        raise ValidationError("cannot derive a smoothing floor from an empty histogram")
    return 1.0 / (2.0 * q.total)


def kl_divergence(p: Histogram, q: Histogram, epsilon: float = 0.0) -> float:
    """D(P || Q) in nats between two normalized count histograms.

    With epsilon = 0 the divergence is reported honestly: any cell that p
    occupies but q does not makes the result math.inf. With epsilon > 0,
    q's probability in every cell of the union support is floored at
    epsilon and renormalized, so the result is always finite.
    """
    if p.total <= 0:
        raise ValidationError("KL divergence needs a non-empty reference histogram")
    if epsilon < 0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
    p_counts = p.counts
    q_counts = q.counts
    p_total = p.total
    q_total = q.total

    if epsilon == 0.0:
        result = 0.0
        for cell, pc in p_counts.items():
            qc = q_counts.get(cell, 0)
            if qc == 0:
                return math.inf
            pi = pc / p_total
            result += pi * log(pi * q_total / qc)
        return result

    support = set(p_counts)
    support.update(q_counts)
    q_prob = {}
    z = 0.0
    for cell in support:
        qi = q_counts.get(cell, 0) / q_total if q_total else 0.0
        qi = max(qi, epsilon)
        q_prob[cell] = qi
        z += qi
    result = 0.0
    for cell, pc in p_counts.items():
        pi = pc / p_total
        result += pi * log(pi * z / q_prob[cell])
    return result
