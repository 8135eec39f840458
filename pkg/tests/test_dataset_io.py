import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from trajprune.dataset_io import (
    iter_jsonl,
    read_dataset,
    read_histogram,
    trajectory_from_record,
    trajectory_to_record,
    write_dataset,
    write_histogram,
    write_report,
)
from trajprune.entropy import EntropyState, Histogram
from trajprune.errors import DatasetFormatError, ValidationError
from trajprune.model import GridSpec, Trajectory, Waypoint
from trajprune.pruning import PruneReport


def traj(tid, pts):
    return Trajectory(id=tid, points=tuple(Waypoint(*p) for p in pts))


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)
headings = st.floats(min_value=-math.pi, max_value=math.pi,
                     exclude_max=True, allow_nan=False)
ids = st.text(st.characters(codec="ascii", categories=("L", "N")), min_size=1, max_size=12)


@st.composite
def datasets(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    names = draw(st.lists(ids, min_size=n, max_size=n, unique=True))
    out = []
    for tid in names:
        pts = draw(st.lists(st.tuples(finite, finite, headings), min_size=1, max_size=5))
        out.append(traj(tid, pts))
    return out


class TestJsonl:
    @settings(max_examples=50)
    @given(datasets())
    def test_round_trip_is_bit_exact(self, tmp_path_factory, data):
        path = tmp_path_factory.mktemp("io") / "d.jsonl"
        write_dataset(data, path)
        assert read_dataset(path) == data

    def test_missing_id_synthesized_from_filename_and_line(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text('{"points": [[0, 0, 0]]}\n\n{"points": [[1, 0, 0]]}\n')
        data = read_dataset(path)
        assert [t.id for t in data] == ["in.jsonl#1", "in.jsonl#3"]

    def test_two_element_points_default_heading_zero(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text('{"id": "a", "points": [[1.5, -2.5]]}\n')
        (t,) = read_dataset(path)
        assert t.points[0] == Waypoint(1.5, -2.5, 0.0)

    def test_heading_is_normalized_on_read(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text(f'{{"id": "a", "points": [[0, 0, {4 * math.pi}]]}}\n')
        (t,) = read_dataset(path)
        assert -math.pi <= t.points[0].heading < math.pi

    def test_duplicate_ids_rejected_with_line_number(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text('{"id": "a", "points": [[0, 0]]}\n{"id": "a", "points": [[1, 0]]}\n')
        with pytest.raises(DatasetFormatError, match=r"in\.jsonl:2.*duplicate.*'a'"):
            read_dataset(path)

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text('{"id": "a", "points": [[0, 0]]}\n{not json\n')
        with pytest.raises(DatasetFormatError, match=r"in\.jsonl:2.*invalid JSON"):
            read_dataset(path)

    def test_non_numeric_coordinate_names_id_and_field(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text('{"id": "bad", "points": [[0, "oops"]]}\n')
        with pytest.raises(DatasetFormatError, match=r"'bad'.*y is not a number"):
            read_dataset(path)

    def test_non_finite_coordinate_names_id_and_field(self, tmp_path):
        path = tmp_path / "in.jsonl"
        path.write_text('{"id": "bad", "points": [[NaN, 0]]}\n')
        with pytest.raises(DatasetFormatError, match=r"'bad'.*non-finite x"):
            read_dataset(path)

    def test_boolean_coordinate_rejected(self):
        with pytest.raises(DatasetFormatError, match="not a number"):
            trajectory_from_record({"id": "a", "points": [[True, 0]]}, "f")

    def test_empty_points_rejected(self):
        with pytest.raises(DatasetFormatError, match="non-empty list"):
            trajectory_from_record({"id": "a", "points": []}, "f")

    def test_non_object_record_rejected(self):
        with pytest.raises(DatasetFormatError, match="expected a JSON object"):
            trajectory_from_record([1, 2], "f")

    def test_wrong_arity_point_rejected(self):
        with pytest.raises(DatasetFormatError, match=r"\[x, y\] or \[x, y, heading\]"):
            trajectory_from_record({"id": "a", "points": [[1, 2, 3, 4]]}, "f")

    def test_iter_jsonl_matches_bulk_read(self, tmp_path):
        data = [traj("a", [(0, 0, 0), (1, 1, 0.5)]), traj("b", [(2, 2, -1)])]
        path = tmp_path / "d.jsonl"
        write_dataset(data, path)
        streamed = iter_jsonl(path)
        assert next(streamed) == data[0]
        assert list(streamed) == data[1:]


class TestCsv:
    @settings(max_examples=50)
    @given(datasets())
    def test_round_trip_is_bit_exact(self, tmp_path_factory, data):
        path = tmp_path_factory.mktemp("io") / "d.csv"
        write_dataset(data, path)
        assert read_dataset(path) == data

    def test_interleaved_groups_and_out_of_order_t(self, tmp_path):
        path = tmp_path / "in.csv"
        path.write_text(
            "trajectory_id,t,x,y,heading\n"
            "a,1,10,0,0\n"
            "b,0,99,0,0\n"
            "a,0,5,0,0\n"
        )
        data = read_dataset(path)
        assert [t.id for t in data] == ["a", "b"]
        assert [w.x for w in data[0].points] == [5.0, 10.0]

    def test_missing_columns_rejected(self, tmp_path):
        path = tmp_path / "in.csv"
        path.write_text("trajectory_id,x,y\na,0,0\n")
        with pytest.raises(DatasetFormatError, match=r"missing CSV columns.*heading.*t"):
            read_dataset(path)

    def test_empty_trajectory_id_rejected(self, tmp_path):
        path = tmp_path / "in.csv"
        path.write_text("trajectory_id,t,x,y,heading\n,0,0,0,0\n")
        with pytest.raises(DatasetFormatError, match="in.csv:2.*empty trajectory_id"):
            read_dataset(path)

    def test_malformed_number_names_line(self, tmp_path):
        path = tmp_path / "in.csv"
        path.write_text("trajectory_id,t,x,y,heading\na,0,zero,0,0\n")
        with pytest.raises(DatasetFormatError, match="in.csv:2.*malformed numeric"):
            read_dataset(path)

    def test_non_finite_value_rejected(self, tmp_path):
        path = tmp_path / "in.csv"
        path.write_text("trajectory_id,t,x,y,heading\na,0,inf,0,0\n")
        with pytest.raises(DatasetFormatError, match="non-finite x"):
            read_dataset(path)


class TestFormatSelection:
    def test_suffixes_infer_format(self, tmp_path):
        data = [traj("a", [(0, 0, 0)])]
        for name in ("d.jsonl", "d.ndjson", "d.csv"):
            path = tmp_path / name
            write_dataset(data, path)
            assert read_dataset(path) == data

    def test_unknown_suffix_requires_explicit_format(self, tmp_path):
        path = tmp_path / "d.dat"
        with pytest.raises(ValidationError, match="cannot infer"):
            write_dataset([traj("a", [(0, 0, 0)])], path)
        write_dataset([traj("a", [(0, 0, 0)])], path, fmt="jsonl")
        assert read_dataset(path, fmt="jsonl")[0].id == "a"

    def test_unknown_format_name_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="unknown dataset format"):
            read_dataset(tmp_path / "d.jsonl", fmt="parquet")


class TestReport:
    def test_prune_report_serializes_every_field(self, tmp_path):
        report = PruneReport(
            entropy_original=1.5, entropy_pruned=1.25,
            kl_original_vs_pruned=0.03, achieved_ratio=0.5,
            occupied_cells_original=10, occupied_cells_pruned=8,
            support_coverage=0.8, n_input=100, n_retained=50, epsilon=0.01)
        path = tmp_path / "r.json"
        write_report(report, path, extra={"method": "entropy"})
        doc = json.loads(path.read_text())
        assert doc == {**report.to_dict(), "method": "entropy"}

    def test_infinite_kl_written_as_string(self, tmp_path):
        report = PruneReport(
            entropy_original=1.0, entropy_pruned=0.5,
            kl_original_vs_pruned=math.inf, achieved_ratio=0.5,
            occupied_cells_original=4, occupied_cells_pruned=2,
            support_coverage=0.5, n_input=10, n_retained=5)
        path = tmp_path / "r.json"
        write_report(report, path)
        assert json.loads(path.read_text())["kl_original_vs_pruned"] == "infinite"

    def test_plain_mapping_accepted(self, tmp_path):
        path = tmp_path / "r.json"
        write_report({"n": 3}, path, extra={"seed": 0})
        assert json.loads(path.read_text()) == {"n": 3, "seed": 0}


GRID = GridSpec(cell_size=0.5, heading_bins=4)


class TestHistogramSnapshot:
    def test_round_trip_preserves_counts_grid_and_meta(self, tmp_path):
        counts = {(0, 0, 0): 3, (-2, 5, 1): 1, (7, -1, 3): 4}
        state = EntropyState(Histogram(dict(counts)))
        path = tmp_path / "h.csv"
        write_histogram(state, GRID, path, extra_meta={"stage": "final"})
        loaded, grid, meta = read_histogram(path)
        assert loaded.histogram.counts == counts
        assert grid == GRID
        assert meta["stage"] == "final"
        assert loaded.entropy() == pytest.approx(state.entropy(), abs=1e-12)

    def test_rows_are_sorted(self, tmp_path):
        state = EntropyState(Histogram({(5, 0, 0): 1, (-1, 2, 3): 2}))
        path = tmp_path / "h.csv"
        write_histogram(state, GRID, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# cell_size=0.5 heading_bins=4")
        assert lines[1] == "ix,iy,ia,count"
        assert lines[2:] == ["-1,2,3,2", "5,0,0,1"]

    def test_empty_state_round_trips(self, tmp_path):
        path = tmp_path / "h.csv"
        write_histogram(EntropyState(), GRID, path)
        loaded, grid, _ = read_histogram(path)
        assert loaded.histogram.counts == {}
        assert loaded.entropy() == 0.0
        assert grid == GRID

    def test_missing_grid_comment_rejected(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("ix,iy,ia,count\n0,0,0,1\n")
        with pytest.raises(DatasetFormatError, match="missing grid header"):
            read_histogram(path)

    def test_unexpected_header_rejected(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("# cell_size=0.5 heading_bins=0\nwrong,header\n")
        with pytest.raises(DatasetFormatError, match="expected header"):
            read_histogram(path)

    def test_wrong_column_count_rejected(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("# cell_size=0.5 heading_bins=0\nix,iy,ia,count\n0,0,1\n")
        with pytest.raises(DatasetFormatError, match="expected 4 columns"):
            read_histogram(path)

    def test_nonpositive_count_rejected(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("# cell_size=0.5 heading_bins=0\nix,iy,ia,count\n0,0,0,0\n")
        with pytest.raises(DatasetFormatError, match="counts must be positive"):
            read_histogram(path)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("# cell_size=0.5 heading_bins=0\nix,iy,ia,count\n0,0,0,x\n")
        with pytest.raises(DatasetFormatError, match="malformed row"):
            read_histogram(path)
