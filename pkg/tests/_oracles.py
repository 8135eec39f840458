"""Reference implementations for tests, kept independent of the cached paths.

Everything here recomputes from raw counts with math.fsum so that results do
not depend on summation order; candidates whose gains are analytically equal
come out bitwise equal, which keeps stable-sort tie-breaking comparable
between the library and these oracles.
"""

import math
from collections import Counter

import numpy as np

from trajprune.model import discretize
from trajprune.pruning import retention_target


def reference_entropy(counts):
    total = sum(counts)
    if total == 0:
        return 0.0
    return -math.fsum((c / total) * math.log(c / total) for c in counts if c)


def scratch_gains(counts, candidates_cells):
    """From-scratch entropy gain of adding each candidate's cells to counts."""
    h0 = reference_entropy(counts.values())
    gains = []
    for cells in candidates_cells:
        trial = Counter(counts)
        trial.update(cells)
        gains.append(reference_entropy(trial.values()) - h0)
    return gains


def greedy_reference(dataset, ratio, batch_size, n0, seed, grid):
    """Batch-greedy selection recomputed from scratch at every step.

    Mirrors the published contract: one seeded shuffle, the first n0 kept
    outright, then per batch a stable descending sort on from-scratch gains
    with a cumulative proportional keep quota.
    """
    n = len(dataset)
    target = retention_target(n, ratio)
    order = list(np.random.default_rng(seed).permutation(n))
    counts = Counter()
    retained = []
    for idx in order[:n0]:
        counts.update(discretize(dataset[idx], grid))
        retained.append(dataset[idx].id)

    budget = target - n0
    candidates = n - n0
    processed = kept = 0
    pos = n0
    while pos < n:
        batch = order[pos:pos + batch_size]
        pos += len(batch)
        gains = scratch_gains(counts, [discretize(dataset[i], grid) for i in batch])
        processed += len(batch)
        quota = (2 * budget * processed + candidates) // (2 * candidates)
        keep = min(max(quota - kept, 0), len(batch))
        kept += keep
        ranked = sorted(range(len(batch)), key=gains.__getitem__, reverse=True)
        for j in ranked[:keep]:
            counts.update(discretize(dataset[batch[j]], grid))
            retained.append(dataset[batch[j]].id)
    return retained
