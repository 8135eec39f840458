"""Command-line front end: prune, stats, compare, gen, filter.

Conventions shared by every subcommand: human-readable summaries go to
standard output, datasets / reports / snapshots go to files, errors go
to standard error. Exit codes: 0 success, 1 invalid flags or data,
2 I/O failure. All randomness is seeded, so any command run twice with
the same flags and inputs produces identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .dataset_io import (
    read_dataset,
    read_histogram,
    trajectory_from_record,
    write_dataset,
    write_histogram,
    write_report,
)
from .entropy import build_histogram
from .errors import DatasetFormatError, ValidationError
from .model import GridSpec
from .pruning import (
    FilterPolicy,
    PruneParams,
    StreamingFilter,
    prune_entropy,
    prune_random,
)
from .synthetic import SyntheticSpec, generate_synthetic


class _Parser(argparse.ArgumentParser):
    """argparse's default exit code for bad flags is 2; this tool reserves
    2 for I/O failures, so flag errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    return "inf" if math.isinf(value) else repr(value)


def _parse_epsilon(text: str) -> float | None:
    """'auto' means the half-pseudo-count default; otherwise a float >= 0."""
    if text == "auto":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"--epsilon must be a number or 'auto', got {text!r}") from None
    if not value >= 0.0:
        raise ValidationError(f"--epsilon must be >= 0, got {text}")
    return value


def _parse_ratio(value: float, flag: str) -> float:
    if not (0.0 < value < 1.0):
        raise ValidationError(f"{flag} must be in the open interval (0, 1), got {value}")
    return value


def _parse_mix(text: str) -> dict[str, float]:
    mix: dict[str, float] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, weight = item.partition("=")
        if not sep:
            raise ValidationError(f"--mix entries must look like name=weight, got {item!r}")
        try:
            mix[name.strip()] = float(weight)
        except ValueError:
            raise ValidationError(f"--mix weight for {name.strip()!r} is not a number: {weight!r}") from None
    if not mix:
        raise ValidationError("--mix must name at least one category")
    return mix


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValidationError(f"{flag} must be two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ValidationError(f"{flag} must be two comma-separated numbers, got {text!r}") from None


def cmd_prune(args) -> int:
    ratio = _parse_ratio(args.ratio, "--ratio")
    grid = GridSpec(cell_size=args.cell_size, heading_bins=args.heading_bins)
    epsilon = _parse_epsilon(args.epsilon)
    dataset = read_dataset(args.input, args.format)

    run_info = {
        "method": args.method,
        "ratio": ratio,
        "cell_size": grid.cell_size,
        "heading_bins": grid.heading_bins,
        "seed": args.seed,
    }
    if args.method == "entropy":
        params = PruneParams(ratio=ratio, grid=grid, batch_size=args.batch_size,
                             initial_size=args.initial_size, seed=args.seed)
        result = prune_entropy(dataset, params, threads=args.threads, epsilon=epsilon)
        batch_size, initial_size = params.resolve(len(dataset))
        run_info["batch_size"] = batch_size
        run_info["initial_size"] = initial_size
        run_info["threads"] = args.threads
    else:
        result = prune_random(dataset, ratio, args.seed, grid, epsilon=epsilon)

    keep = set(result.retained_ids)
    write_dataset((t for t in dataset if t.id in keep), args.output, args.format)
    if args.report:
        write_report(result.report, args.report, extra=run_info)

    rep = result.report
    print(f"n={rep.n_input} retained={rep.n_retained}"
          f" achieved_ratio={_fmt(rep.achieved_ratio)}"
          f" entropy_before={_fmt(rep.entropy_original)}"
          f" entropy_after={_fmt(rep.entropy_pruned)}"
          f" kl={_fmt(rep.kl_original_vs_pruned)}")
    return 0


def cmd_stats(args) -> int:
    grid = GridSpec(cell_size=args.cell_size, heading_bins=args.heading_bins)
    dataset = read_dataset(args.input, args.format)
    state = build_histogram(dataset, grid)
    print(f"n={len(dataset)} points={state.total}"
          f" occupied_cells={state.histogram.occupied()}"
          f" entropy={_fmt(state.entropy())}")
    if args.histogram_out:
        write_histogram(state, grid, args.histogram_out)
    return 0


def cmd_compare(args) -> int:
    ratios = []
    for part in args.ratios.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            value = float(part)
        except ValueError:
            raise ValidationError(f"--ratios entries must be numbers, got {part!r}") from None
        ratios.append(_parse_ratio(value, "--ratios"))
    if not ratios:
        raise ValidationError("--ratios must list at least one value")
    if args.seeds < 1:
        raise ValidationError(f"--seeds must be >= 1, got {args.seeds}")
    seeds = list(range(args.seeds))

    grid = GridSpec(cell_size=args.cell_size, heading_bins=args.heading_bins)
    dataset = read_dataset(args.input, args.format)

    runs = []
    for ratio in ratios:
        for method in ("entropy", "random"):
            for seed in seeds:
                if method == "entropy":
                    params = PruneParams(ratio=ratio, grid=grid, batch_size=args.batch_size,
                                         initial_size=args.initial_size, seed=seed)
                    rep = prune_entropy(dataset, params, threads=args.threads,
                                        epsilon=None).report
                else:
                    rep = prune_random(dataset, ratio, seed, grid, epsilon=None).report
                runs.append({
                    "ratio": ratio,
                    "method": method,
                    "seed": seed,
                    "entropy_pruned": rep.entropy_pruned,
                    "kl_smoothed": rep.kl_original_vs_pruned,
                    "epsilon": rep.epsilon,
                    "support_coverage": rep.support_coverage,
                    # coverage < 1 iff some original cell emptied iff unsmoothed KL diverges
                    "infinite": rep.support_coverage < 1.0,
                    "n_retained": rep.n_retained,
                })

    summary = []
    columns = ["ratio", "method", "entropy_pruned_mean", "kl_smoothed_mean",
               "inf_rate", "support_coverage_mean"]
    print("\t".join(columns))
    for ratio in ratios:
        for method in ("entropy", "random"):
            group = [r for r in runs if r["ratio"] == ratio and r["method"] == method]
            k = len(group)
            row = {
                "ratio": ratio,
                "method": method,
                "entropy_pruned_mean": sum(r["entropy_pruned"] for r in group) / k,
                "kl_smoothed_mean": sum(r["kl_smoothed"] for r in group) / k,
                "inf_rate": sum(r["infinite"] for r in group) / k,
                "support_coverage_mean": sum(r["support_coverage"] for r in group) / k,
            }
            summary.append(row)
            print("\t".join(_fmt(row[c]) if isinstance(row[c], float) else str(row[c])
                            for c in columns))

    doc = {
        "cell_size": grid.cell_size,
        "heading_bins": grid.heading_bins,
        "ratios": ratios,
        "seeds": seeds,
        "n_input": len(dataset),
        "runs": runs,
        "summary": summary,
    }
    with Path(args.out).open("w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    return 0


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        count=args.count,
        mix=_parse_mix(args.mix),
        points_per_trajectory=args.points,
        speed_range=_parse_pair(args.speed_range, "--speed-range"),
        turn_radius_range=_parse_pair(args.radius_range, "--radius-range"),
        noise_std=args.noise,
        timestep=args.timestep,
        seed=args.seed,
    )
    trajectories = generate_synthetic(spec)
    write_dataset(trajectories, args.output, args.format)
    print(f"wrote {len(trajectories)} trajectories to {args.output}")
    return 0


def cmd_filter(args) -> int:
    state = None
    grid = None
    history: tuple[float, ...] = ()
    if args.state and Path(args.state).exists():
        state, grid, meta = read_histogram(args.state)
        if args.cell_size is not None and args.cell_size != grid.cell_size:
            raise ValidationError(
                f"--cell-size {args.cell_size} conflicts with saved state ({grid.cell_size})")
        if args.heading_bins is not None and args.heading_bins != grid.heading_bins:
            raise ValidationError(
                f"--heading-bins {args.heading_bins} conflicts with saved state ({grid.heading_bins})")
        if meta.get("window"):
            history = tuple(float(v) for v in meta["window"].split(","))
        if "weighted_log_sum" in meta:
            # restore the incrementally built cache bit-for-bit so a resumed
            # run scores candidates exactly as the uninterrupted one would
            state.weighted_log_sum = float(meta["weighted_log_sum"])
    if grid is None:
        grid = GridSpec(
            cell_size=args.cell_size if args.cell_size is not None else 0.5,
            heading_bins=args.heading_bins if args.heading_bins is not None else 0,
        )

    if args.policy == "threshold":
        policy = FilterPolicy.threshold_at(args.threshold)
    else:
        policy = FilterPolicy.top_fraction(args.keep_fraction, args.window)
    flt = StreamingFilter(policy, grid, state=state, history=history)

    for lineno, raw in enumerate(sys.stdin, start=1):
        line = raw.strip()
        if not line:
            continue
        where = f"stdin:{lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise DatasetFormatError(f"{where}: invalid JSON ({e})") from e
        t = trajectory_from_record(record, fallback_id=f"stdin#{lineno}", where=where)
        accepted = flt.step(t)
        if accepted:
            sys.stdout.write(line + "\n")
        if args.verbose:
            print(f"{'accept' if accepted else 'reject'}\t{t.id}", file=sys.stderr)

    if args.state:
        extra_meta = {"weighted_log_sum": repr(flt.state.weighted_log_sum)}
        if flt.history:
            extra_meta["window"] = ",".join(repr(g) for g in flt.history)
        write_histogram(flt.state, grid, args.state, extra_meta=extra_meta)
    return 0


def _add_grid_flags(parser: argparse.ArgumentParser, default_cell: float | None = 0.5,
                    default_bins: int | None = 0) -> None:
    parser.add_argument("--cell-size", type=float, default=default_cell,
                        help="grid cell side length (default 0.5)")
    parser.add_argument("--heading-bins", type=int, default=default_bins,
                        help="heading bins over [-pi, pi); 0 disables the heading axis (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trajprune",
                     description="Entropy-guided trajectory dataset pruning toolkit.")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="command")

    p = sub.add_parser("prune", help="prune a dataset by entropy-greedy or random selection")
    p.add_argument("--input", required=True, help="dataset to prune (.jsonl or .csv)")
    p.add_argument("--output", required=True, help="where to write the retained subset")
    p.add_argument("--ratio", type=float, required=True,
                   help="fraction of trajectories to remove, in (0, 1)")
    p.add_argument("--method", choices=("entropy", "random"), default="entropy")
    _add_grid_flags(p)
    p.add_argument("--batch-size", type=int, default=None,
                   help="candidate batch size (default max(1024, n // 1000))")
    p.add_argument("--initial-size", type=int, default=None,
                   help="size of the seeded initial subset (default: one batch)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="optional JSON report path")
    p.add_argument("--epsilon", default="0",
                   help="KL smoothing floor: a number, or 'auto' for 1/(2*points_kept) (default 0)")
    p.add_argument("--threads", type=int, default=1,
                   help="scoring threads; never changes the output")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None,
                   help="force dataset format instead of inferring from suffixes")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("stats", help="print dataset size, occupied cells, and entropy")
    p.add_argument("--input", required=True)
    _add_grid_flags(p)
    p.add_argument("--histogram-out", default=None, help="optional histogram snapshot path")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("compare", help="compare entropy vs random pruning over ratios and seeds")
    p.add_argument("--input", required=True)
    p.add_argument("--ratios", required=True, help="comma-separated removal fractions, e.g. 0.1,0.4")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds (0..k-1) per cell")
    _add_grid_flags(p)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--initial-size", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="machine-readable JSON results path")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen", help="generate a synthetic trajectory dataset")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--mix", required=True,
                   help="category weights summing to 1, e.g. stationary=0.4,straight=0.5,left_turn=0.05,right_turn=0.05")
    p.add_argument("--points", type=int, default=10, help="waypoints per trajectory")
    p.add_argument("--noise", type=float, default=0.0, help="position noise std dev")
    p.add_argument("--speed-range", default="5,15", help="speed bounds, m/s")
    p.add_argument("--radius-range", default="8,30", help="turn radius bounds, m")
    p.add_argument("--timestep", type=float, default=0.1, help="waypoint spacing, s")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("filter", help="stream JSONL records from stdin, echo accepted ones to stdout")
    p.add_argument("--state", default=None,
                   help="histogram snapshot to resume from and persist to on clean shutdown")
    p.add_argument("--policy", choices=("threshold", "top-fraction"), default="threshold")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="minimum entropy gain in nats (use --threshold=-inf to accept everything)")
    p.add_argument("--keep-fraction", type=float, default=0.5,
                   help="top-fraction mode: fraction of recent candidates to admit")
    p.add_argument("--window", type=int, default=256,
                   help="top-fraction mode: number of recent gains to rank against")
    _add_grid_flags(p, default_cell=None, default_bins=None)
    p.add_argument("--verbose", action="store_true", help="log accept/reject per record to stderr")
    p.set_defaults(func=cmd_filter)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
