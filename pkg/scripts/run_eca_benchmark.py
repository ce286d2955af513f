#!/usr/bin/env python3
"""All 256 elementary CA rules under five complexity measures, summarised by Wolfram class.

    python3 scripts/run_eca_benchmark.py --seeds 0 1 2 --out bench/
"""
import argparse
from pathlib import Path

from algorand_lab.bench import MEASURES, BenchConfig, benchmark_records, class_stats, default_class_table, run_benchmark
from algorand_lab.complexity import CtmEstimator
from algorand_lab.io import atomic_write, render_results
from algorand_lab.turing import TmSpace, build_ctm_table, complement_completed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--width", type=int, default=100)
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--init", choices=("seeded_random", "single_one"), default="seeded_random")
    ap.add_argument("--out", default=None, help="directory for per-seed CSV files")
    args = ap.parse_args()

    est = CtmEstimator(complement_completed(build_ctm_table(TmSpace(3, 22))))
    classes = default_class_table()
    for seed in args.seeds:
        cfg = BenchConfig(width=args.width, steps=args.steps, seed=seed, initial=args.init)
        rows = run_benchmark(cfg, est, classes)
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            atomic_write(Path(args.out) / f"bench_seed{seed}.csv", render_results(benchmark_records(rows), "csv"))
        print(f"seed {seed}")
        for m in MEASURES:
            st = class_stats(rows, m)
            means = "  ".join(f"c{c}={s.mean:.3f}" for c, s in st.summary.items())
            flags = " ".join(f"{a}{b}" for (a, b), v in st.overlaps.items() if v)
            print(f"  {m:16s} {means}   overlapping pairs: {flags or '-'}")


if __name__ == "__main__":
    main()
