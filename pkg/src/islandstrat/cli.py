"""Command-line front end.

Exit status: 0 success, 1 usage or configuration error, 2 data error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiment
from .config import config_from_dict, load_config
from .exceptions import ConfigError, DataError
from .io import (
    file_digest,
    read_genomes,
    read_json,
    read_phylogeny,
    write_genomes,
    write_json,
    write_pedigree,
    write_phylogeny,
)
from .metrics import METRIC_NAMES, compute_report
from .stats import mann_whitney
from .surface_check import run_surface_suite
from .trie import to_newick

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(args):
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = config.replace(seed=args.seed)
    return config


def cmd_run(args) -> int:
    config = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sim, stats = experiment.simulate(config)
    rows = experiment.sample_rows(sim, config.per_pe, config.seed)
    write_genomes(out / "genomes.csv", rows)
    if config.exact_tracking:
        write_pedigree(out / "pedigree.csv", sim.pedigree())
    write_json(out / "run_summary.json", experiment.run_summary(config, stats))
    print(
        f"{stats.pe_generations} PE-generations in {stats.wall_seconds:.2f}s "
        f"({stats.pe_generations_per_second:.0f}/s); wrote {out}"
    )
    return EXIT_OK


def _config_for(args, genomes_path: Path):
    if args.config:
        return load_config(args.config)
    summary = genomes_path.parent / "run_summary.json"
    if not summary.exists():
        raise UsageError("no --config given and no run_summary.json next to the genomes file")
    return config_from_dict(read_json(summary)["config"])


def cmd_reconstruct(args) -> int:
    genomes = Path(args.genomes)
    config = _config_for(args, genomes)
    rows = read_genomes(genomes)
    subsample = args.subsample if args.subsample is not None else config.subsample_total
    if subsample is not None and subsample > len(rows):
        raise UsageError(f"--subsample {subsample} exceeds the {len(rows)} genomes available")
    seed = args.seed if args.seed is not None else config.seed
    try:
        table = experiment.reconstruct_rows(rows, config.surface, subsample, seed)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    write_phylogeny(args.out, table)
    if args.newick:
        Path(args.newick).write_text(to_newick(table) + "\n", encoding="utf-8")
    print(f"reconstructed {len(table)} nodes from {subsample or len(rows)} genomes")
    return EXIT_OK


def cmd_metrics(args) -> int:
    table = read_phylogeny(args.phylogeny)
    report = compute_report(table).as_dict()
    report["pair_budget"] = None
    report["input_digest"] = file_digest(args.phylogeny)
    write_json(args.out, report)
    return EXIT_OK


def _metric_values(directory, metric):
    files = sorted(Path(directory).glob("*.json"))
    values = []
    for f in files:
        doc = read_json(f)
        if metric in doc:
            values.append(float(doc[metric]))
    return values


def cmd_compare(args) -> int:
    if args.metric not in METRIC_NAMES:
        raise UsageError(f"--metric must be one of {', '.join(METRIC_NAMES)}")
    a = _metric_values(args.dir_a, args.metric)
    b = _metric_values(args.dir_b, args.metric)
    if len(a) < 3 or len(b) < 3:
        raise DataError(
            f"need >= 3 replicate metric files per side, got {len(a)} and {len(b)}"
        )
    result = mann_whitney(a, b, args.alternative)
    result["metric"] = args.metric
    write_json(args.out, result)
    print(f"{args.metric}: U={result['u']:g} p={result['p_value']:.4g} ({result['direction']})")
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _load(args)
    result = experiment.bench(config, warmup_rounds=args.warmup_rounds)
    if args.out:
        write_json(args.out, result)
    print(
        f"{result['pe_generations_per_second']:.0f} PE-generations/s, "
        f"{result['replications_per_second']:.3g} replications/s, "
        f"{result['replications_per_day']:.3g} replications/day"
    )
    if not result["meets_target"]:
        print(
            f"warning: below {result['replications_per_second_target']:.0e} "
            "replications/s target (performance regression)",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_surface_check(args) -> int:
    results = run_surface_suite(max_time=args.max_time)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_DATA


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="islandstrat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="simulate and write genomes.csv, run_summary.json")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reconstruct", help="trie reconstruction from genomes.csv")
    p.add_argument("genomes")
    p.add_argument("--out", required=True, help="phylogeny CSV path")
    p.add_argument("--config", help="defaults to run_summary.json beside the genomes")
    p.add_argument("--subsample", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--newick", help="also write a Newick file")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("metrics", help="phylometrics JSON from a phylogeny CSV")
    p.add_argument("phylogeny")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="Mann-Whitney U between two metric directories")
    p.add_argument("dir_a")
    p.add_argument("dir_b")
    p.add_argument("--metric", required=True)
    p.add_argument("--alternative", default="greater", help="greater, less or two-sided")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="simulator throughput")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--warmup-rounds", type=int, default=10)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("surface-check", help="exhaustive surface placement checks")
    p.add_argument("--max-time", type=int, default=2**16)
    p.set_defaults(func=cmd_surface_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
