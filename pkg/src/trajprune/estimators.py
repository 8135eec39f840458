"""Scikit-learn style wrappers around the pruning operations.

The pruners behave like sample selectors: fit(X) decides which trajectories
to keep, transform(X) filters a trajectory sequence down to the retained
ids. X is a sequence of Trajectory objects (like text vectorizers, these
estimators work on raw domain objects, not numeric arrays), so they compose
with sklearn pipelines, cloning, and parameter search.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .model import GridSpec, validate_trajectories
from .pruning import PruneParams, prune_entropy, prune_random


class EntropyPruner(BaseEstimator, TransformerMixin):
    """Greedy entropy-maximizing trajectory selector.

    Parameters
    ----------
    ratio : float
        Fraction of trajectories to remove, in (0, 1).
    cell_size : float
        Grid resolution in meters.
    heading_bins : int
        0 for a 2D projection; k > 0 bins heading into k sectors.
    batch_size, initial_size : int or None
        Batch of candidates scored per round and size of the random seed
        subset; None picks max(1024, n // 1000).
    seed : int
        Shuffle seed.
    epsilon : float
        Smoothing floor for the KL diagnostic in the fitted report
        (0 reports divergence as infinity).
    threads : int
        Worker threads for batch scoring; never changes the result.

    Attributes
    ----------
    retained_ids_ : list of str
        Ids of the kept trajectories, in acceptance order.
    report_ : PruneReport
        Entropy/KL/coverage accounting of the fitted selection.
    """

    def __init__(self, ratio=0.4, cell_size=0.5, heading_bins=0,
                 batch_size=None, initial_size=None, seed=0,
                 epsilon=0.0, threads=1):
        self.ratio = ratio
        self.cell_size = cell_size
        self.heading_bins = heading_bins
        self.batch_size = batch_size
        self.initial_size = initial_size
        self.seed = seed
        self.epsilon = epsilon
        self.threads = threads

    def fit(self, X, y=None):
        X = list(X)
        validate_trajectories(X)
        params = PruneParams(
            ratio=self.ratio,
            grid=GridSpec(cell_size=self.cell_size, heading_bins=self.heading_bins),
            batch_size=self.batch_size,
            initial_size=self.initial_size,
            seed=self.seed,
        )
        result = prune_entropy(X, params, threads=self.threads, epsilon=self.epsilon)
        self.retained_ids_ = result.retained_ids
        self.report_ = result.report
        return self

    def transform(self, X):
        check_is_fitted(self, "retained_ids_")
        keep = set(self.retained_ids_)
        return [t for t in X if t.id in keep]


class RandomPruner(BaseEstimator, TransformerMixin):
    """Seeded uniform baseline with the same selector interface."""

    def __init__(self, ratio=0.4, cell_size=0.5, heading_bins=0, seed=0, epsilon=0.0):
        self.ratio = ratio
        self.cell_size = cell_size
        self.heading_bins = heading_bins
        self.seed = seed
        self.epsilon = epsilon

    def fit(self, X, y=None):
        X = list(X)
        validate_trajectories(X)
        grid = GridSpec(cell_size=self.cell_size, heading_bins=self.heading_bins)
        result = prune_random(X, ratio=self.ratio, seed=self.seed, grid=grid,
                              epsilon=self.epsilon)
        self.retained_ids_ = result.retained_ids
        self.report_ = result.report
        return self

    def transform(self, X):
        check_is_fitted(self, "retained_ids_")
        keep = set(self.retained_ids_)
        return [t for t in X if t.id in keep]
