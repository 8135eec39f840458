import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from trajprune.errors import ValidationError
from trajprune.estimators import EntropyPruner, RandomPruner
from trajprune.model import GridSpec, Trajectory, Waypoint
from trajprune.pruning import PruneParams, prune_entropy, prune_random


def traj(tid, cx):
    return Trajectory(id=tid, points=(Waypoint(cx + 0.5, 0.5, 0.0),))


DATA = [traj(f"t{i}", i % 6) for i in range(30)]


class TestEntropyPruner:
    def test_fit_sets_retained_ids_and_report(self):
        est = EntropyPruner(ratio=0.5, batch_size=5, initial_size=2, seed=3)
        assert est.fit(DATA) is est
        assert len(est.retained_ids_) == 15
        assert est.report_.n_retained == 15
        assert est.report_.n_input == 30

    def test_fit_matches_functional_core(self):
        est = EntropyPruner(ratio=0.5, cell_size=0.5, heading_bins=0,
                            batch_size=5, initial_size=2, seed=3).fit(DATA)
        params = PruneParams(ratio=0.5, grid=GridSpec(0.5, 0),
                             batch_size=5, initial_size=2, seed=3)
        assert est.retained_ids_ == prune_entropy(DATA, params).retained_ids

    def test_transform_filters_preserving_input_order(self):
        est = EntropyPruner(ratio=0.5, batch_size=5, initial_size=2).fit(DATA)
        out = est.transform(DATA)
        assert [t.id for t in out] == [t.id for t in DATA if t.id in set(est.retained_ids_)]
        assert len(out) == 15

    def test_fit_transform_composes(self):
        est = EntropyPruner(ratio=0.5, batch_size=5, initial_size=2)
        assert len(est.fit_transform(DATA)) == 15

    def test_transform_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            EntropyPruner().transform(DATA)

    def test_invalid_ratio_surfaces_at_fit(self):
        est = EntropyPruner(ratio=1.5)
        with pytest.raises(ValidationError, match="ratio"):
            est.fit(DATA)

    def test_get_params_round_trips(self):
        est = EntropyPruner(ratio=0.3, cell_size=1.0, heading_bins=8,
                            batch_size=64, initial_size=8, seed=9,
                            epsilon=0.01, threads=2)
        params = est.get_params()
        assert params["ratio"] == 0.3
        assert params["heading_bins"] == 8
        est2 = EntropyPruner().set_params(**params)
        assert est2.get_params() == params

    def test_sklearn_clone_preserves_params_and_drops_state(self):
        est = EntropyPruner(ratio=0.5, batch_size=5, initial_size=2).fit(DATA)
        fresh = clone(est)
        assert fresh.get_params() == est.get_params()
        assert not hasattr(fresh, "retained_ids_")


class TestRandomPruner:
    def test_fit_matches_functional_core(self):
        est = RandomPruner(ratio=0.4, seed=7).fit(DATA)
        expected = prune_random(DATA, ratio=0.4, seed=7, grid=GridSpec(0.5, 0))
        assert est.retained_ids_ == expected.retained_ids

    def test_transform_filters(self):
        est = RandomPruner(ratio=0.4, seed=7).fit(DATA)
        assert len(est.transform(DATA)) == len(est.retained_ids_)

    def test_clone_and_params(self):
        est = RandomPruner(ratio=0.2, cell_size=2.0, heading_bins=4, seed=1, epsilon=0.5)
        assert clone(est).get_params() == est.get_params()

    def test_transform_before_fit_raises(self):
        with pytest.raises(NotFittedError):
            RandomPruner().transform(DATA)

    def test_duplicate_ids_rejected_at_fit(self):
        with pytest.raises(ValidationError, match="duplicate"):
            RandomPruner().fit([traj("a", 0), traj("a", 1)])
