"""Command-line interface.

Exit status: 0 on success, 1 on usage errors, 2 on data/validation errors.
File outputs are written atomically; ``--output X`` also writes ``X.meta.json``
with the resolved, result-affecting configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .aid import Perturbation, information_delta, reconstruct_time_order, row_impact_profile
from .bench import (
    MEASURES,
    BenchConfig,
    benchmark_records,
    class_stats,
    default_class_table,
    load_class_table,
    read_benchmark_csv,
    run_benchmark,
)
from .complexity import CtmEstimator, bdm_grid, bdm_string, ctm_value
from .core import BitGrid, parse_bits, parse_grid_text, render_pbm
from .eca import INTERACTION_MODEL, EcaRule, evolve, interact, langton_lambda, random_initial, simplify, single_one
from .io import atomic_write, dump_ctm_table, read_ctm_table, render_results
from .turing import TmSpace, build_ctm_table, complement_completed, merge_ctm_tables, sample_ctm_table

log = logging.getLogger("algorand_lab")

# Execution settings that must not influence results; kept out of metadata.
_NOT_CONFIG = {"func", "output", "threads", "verbose"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _env_threads() -> int:
    try:
        return max(1, int(os.environ.get("ALGORAND_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    p.add_argument("--threads", type=int, default=_env_threads(), help="worker threads (env ALGORAND_LAB_THREADS)")
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--format", choices=("csv", "json", "pbm"), default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _table_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--table", required=required, help="CTM table file")
    p.add_argument("--fallback", choices=("error", "max_plus_one"), default="max_plus_one")


def _estimator(args) -> CtmEstimator:
    return CtmEstimator(read_ctm_table(args.table), args.fallback)


def _emit(args, data: bytes) -> None:
    if args.output:
        atomic_write(args.output, data)
        cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_CONFIG}
        cfg["version"] = __version__
        meta = (json.dumps(cfg, indent=1, sort_keys=True, default=str) + "\n").encode()
        atomic_write(f"{args.output}.meta.json", meta)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _fmt(args, default: str, allowed=("csv", "json")) -> str:
    fmt = args.format or default
    if fmt not in allowed:
        raise UsageError(f"--format {fmt} not supported here (choose from {', '.join(allowed)})")
    return fmt


def _initial(args):
    if args.init == "single":
        return single_one(args.width)
    return random_initial(args.width, args.seed)


def _grid_bytes(args, grid: BitGrid) -> bytes:
    fmt = _fmt(args, "pbm", ("pbm", "csv", "json"))
    if fmt == "pbm":
        return render_pbm(grid)
    rows = grid.cells.tolist()
    if fmt == "csv":
        return "".join(",".join(map(str, r)) + "\n" for r in rows).encode()
    return (json.dumps(rows) + "\n").encode()


def cmd_eca_evolve(args):
    grid = evolve(EcaRule(args.rule), _initial(args), args.steps)
    _emit(args, _grid_bytes(args, grid))


def cmd_eca_interact(args):
    args.interaction_model = INTERACTION_MODEL
    grid = interact(EcaRule(args.rule_a), EcaRule(args.rule_b), _initial(args), args.steps, args.split)
    _emit(args, _grid_bytes(args, grid))


def _rules(args) -> list[int]:
    if args.all == (args.rule is not None):
        raise UsageError("give exactly one of --rule N or --all")
    return list(range(256)) if args.all else [args.rule]


def cmd_eca_simplify(args):
    rows = []
    for n in _rules(args):
        s = simplify(EcaRule(n))
        rows.append(
            {
                "rule": n,
                "icon_count": s.icon_count,
                "icons_1": len(s.side(1)),
                "icons_0": len(s.side(0)),
                "specified_cells": s.specified_cells,
                "bits_upper_bound": s.bits_upper_bound,
                "icons": " ".join(str(i) for i in s.icons),
            }
        )
    _emit(args, render_results(rows, _fmt(args, "csv")))


def cmd_eca_lambda(args):
    rows = [{"rule": n, "lambda": langton_lambda(EcaRule(n))} for n in _rules(args)]
    _emit(args, render_results(rows, _fmt(args, "csv")))


def _parse_range(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if not m:
        raise UsageError(f"--range must look like LO..HI, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def cmd_ctm_build(args):
    space = TmSpace.default(args.states, args.cutoff)
    args.cutoff = space.cutoff
    if args.sample is not None:
        if args.range:
            raise UsageError("--sample and --range are exclusive")
        table = sample_ctm_table(space, args.sample, args.seed)
    else:
        rng = _parse_range(args.range) if args.range else None
        table = build_ctm_table(space, rng, workers=args.threads)
    if args.complete_complement:
        table = complement_completed(table)
    _emit(args, dump_ctm_table(table))


def cmd_ctm_merge(args):
    tables = [read_ctm_table(f) for f in args.files]
    merged = tables[0]
    for t in tables[1:]:
        merged = merge_ctm_tables(merged, t)
    _emit(args, dump_ctm_table(merged))


def cmd_ctm_query(args):
    est = _estimator(args)
    rows = [{"string": s, "ctm_bits": ctm_value(est, parse_bits(s))} for s in args.string]
    _emit(args, render_results(rows, _fmt(args, "csv")))


def _read_grid(path: str) -> BitGrid:
    return parse_grid_text(Path(path).read_text())


def cmd_bdm(args):
    est = _estimator(args)
    if re.fullmatch(r"[01]+", args.input) and not Path(args.input).exists():
        report = bdm_string(est, parse_bits(args.input), args.d)
    else:
        report = bdm_grid(est, _read_grid(args.input), args.d)
    rec = asdict(report)
    census = rec.pop("block_census")
    rec["distinct_blocks"] = len(census)
    fmt = _fmt(args, "csv")
    if fmt == "json":
        rec["block_census"] = [{"block": b, "count": n} for b, n in census]
    _emit(args, render_results([rec], fmt))


def _perturbation(args, grid: BitGrid) -> Perturbation:
    if args.flip and args.row is not None:
        raise UsageError("use either --flip or --row/--replacement")
    if args.flip:
        cells = []
        for item in args.flip:
            m = re.fullmatch(r"(\d+),(\d+)", item)
            if not m:
                raise UsageError(f"--flip expects R,C, got {item!r}")
            cells.append((int(m.group(1)), int(m.group(2))))
        return Perturbation.flip(*cells)
    if args.row is not None:
        if args.replacement is None:
            raise UsageError("--row needs --replacement BITS")
        return Perturbation.replace_row(args.row, parse_bits(args.replacement))
    raise UsageError("aid delta needs --flip R,C or --row R --replacement BITS")


def cmd_aid_delta(args):
    est, grid = _estimator(args), _read_grid(args.grid)
    report = information_delta(est, grid, _perturbation(args, grid), args.d, label="delta")
    _emit(args, render_results([report], _fmt(args, "csv")))


def _mode_seed(args):
    return args.mode, (args.seed if args.mode == "replace_random" else None)


def cmd_aid_profile(args):
    est, grid = _estimator(args), _read_grid(args.grid)
    mode, seed = _mode_seed(args)
    prof = row_impact_profile(est, grid, args.d, mode, seed)
    _emit(args, render_results([{"row": r, "impact": v} for r, v in enumerate(prof)], _fmt(args, "csv")))


def cmd_aid_order(args):
    est, grid = _estimator(args), _read_grid(args.grid)
    mode, seed = _mode_seed(args)
    order = reconstruct_time_order(est, grid, args.d, mode, seed)
    _emit(args, render_results([{"rank": i, "row": r} for i, r in enumerate(order)], _fmt(args, "csv")))


def cmd_bench_run(args):
    est = _estimator(args)
    if args.classes:
        with open(args.classes, "rb") as fh:
            classes = load_class_table(fh, provenance=f"file:{Path(args.classes).name}")
    else:
        classes = default_class_table()
    args.class_source = classes.source
    cfg = BenchConfig(
        width=args.width, steps=args.steps, seed=args.seed, initial=args.init, d=args.d, workers=args.threads
    )
    rows = run_benchmark(cfg, est, classes)
    _emit(args, render_results(benchmark_records(rows), _fmt(args, "csv")))


def cmd_bench_stats(args):
    rows = read_benchmark_csv(Path(args.results).read_bytes())
    stats = class_stats(rows, args.measure)
    records = stats.to_records()
    classes = sorted(stats.summary)
    for rec in records:
        own = rec["class"]
        for other in classes:
            # a class range trivially overlaps itself
            pair = (min(own, other), max(own, other))
            rec[f"overlaps_{other}"] = True if other == own else stats.overlaps[pair]
    _emit(args, render_results(records, _fmt(args, "csv")))


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="algorand-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    top = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def leaf(sub, name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    eca = top.add_parser("eca", help="elementary cellular automata").add_subparsers(dest="eca_cmd", required=True)
    for name, func, h in (("evolve", cmd_eca_evolve, "space-time diagram"), ("interact", cmd_eca_interact, "two interacting rules")):
        p = leaf(eca, name, func, h)
        if name == "evolve":
            p.add_argument("--rule", type=int, required=True)
        else:
            p.add_argument("--rule-a", type=int, required=True)
            p.add_argument("--rule-b", type=int, required=True)
            p.add_argument("--split", type=int, required=True)
        p.add_argument("--width", type=int, default=100)
        p.add_argument("--steps", type=int, default=100)
        p.add_argument("--init", choices=("single", "random"), default="single")
    for name, func, h in (("simplify", cmd_eca_simplify, "wildcard rule simplification"), ("lambda", cmd_eca_lambda, "Langton's lambda")):
        p = leaf(eca, name, func, h)
        p.add_argument("--rule", type=int)
        p.add_argument("--all", action="store_true")

    ctm = top.add_parser("ctm", help="CTM tables").add_subparsers(dest="ctm_cmd", required=True)
    p = leaf(ctm, "build", cmd_ctm_build, "enumerate an (n,2) machine space")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--cutoff", type=int, help="step cutoff (defaults: 2 for n=1, 7 for n=2, 22 for n=3)")
    p.add_argument("--range", help="machine index interval LO..HI (half-open)")
    p.add_argument("--sample", type=int, help="run this many uniformly sampled machines instead")
    p.add_argument("--complete-complement", action="store_true", help="add the blank-1 half by symmetry")
    p = leaf(ctm, "merge", cmd_ctm_merge, "merge disjoint shards")
    p.add_argument("files", nargs="+")
    p = leaf(ctm, "query", cmd_ctm_query, "CTM value of strings")
    _table_args(p)
    p.add_argument("--string", action="append", required=True)

    p = leaf(top, "bdm", cmd_bdm, "block decomposition of a bit string or grid file")
    _table_args(p)
    p.add_argument("--input", required=True, help="bit string, or a grid file (PBM or 0/1 rows)")
    p.add_argument("--d", type=int, default=4, help="block size")

    aid = top.add_parser("aid", help="perturbation analysis").add_subparsers(dest="aid_cmd", required=True)
    for name, func, h in (
        ("delta", cmd_aid_delta, "information delta of one perturbation"),
        ("profile", cmd_aid_profile, "per-row impact profile"),
        ("order", cmd_aid_order, "reconstruct row time order"),
    ):
        p = leaf(aid, name, func, h)
        _table_args(p)
        p.add_argument("--grid", required=True)
        p.add_argument("--d", type=int, default=4)
        if name == "delta":
            p.add_argument("--flip", action="append", help="cell R,C to flip (repeatable)")
            p.add_argument("--row", type=int)
            p.add_argument("--replacement")
        else:
            p.add_argument("--mode", choices=("flip_all", "replace_random"), default="replace_random")

    bench = top.add_parser("bench", help="all-rules ECA benchmark").add_subparsers(dest="bench_cmd", required=True)
    p = leaf(bench, "run", cmd_bench_run, "compute every measure for all 256 rules")
    _table_args(p)
    p.add_argument("--classes", help="rule,class CSV (default: bundled table)")
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--init", choices=("seeded_random", "single_one"), default="seeded_random")
    p = leaf(bench, "stats", cmd_bench_stats, "per-class summary of one measure")
    p.add_argument("--results", required=True, help="CSV written by 'bench run'")
    p.add_argument("--measure", choices=MEASURES, required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"algorand-lab: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, IndexError, OSError) as exc:
        print(f"algorand-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
