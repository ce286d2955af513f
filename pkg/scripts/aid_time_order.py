#!/usr/bin/env python3
"""Can row perturbations recover the arrow of time of an ECA space-time diagram?

For each rule and seed, rank rows by how much replacing them moves BDM, then
compare that ranking with the true order and with random permutations.

    python3 scripts/aid_time_order.py --rules 30 110 --seeds 0 1 2 3 4
"""
import argparse
import random

from scipy.stats import spearmanr

from algorand_lab.aid import reconstruct_time_order, row_impact_profile
from algorand_lab.complexity import CtmEstimator
from algorand_lab.eca import EcaRule, evolve, single_one
from algorand_lab.turing import TmSpace, build_ctm_table, complement_completed


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rules", type=int, nargs="+", default=[30, 110])
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(10)))
    ap.add_argument("--size", type=int, default=32)
    ap.add_argument("--mode", choices=("flip_all", "replace_random"), default="replace_random")
    ap.add_argument("--permutations", type=int, default=100)
    args = ap.parse_args()

    est = CtmEstimator(complement_completed(build_ctm_table(TmSpace(3, 22))))
    truth = list(range(args.size))
    for rule in args.rules:
        g = evolve(EcaRule(rule), single_one(args.size), args.size - 1)
        for seed in args.seeds:
            impact = row_impact_profile(est, g, 4, args.mode, seed)
            rho_impact = spearmanr(truth, impact).statistic
            order = reconstruct_time_order(est, g, 4, args.mode, seed)
            agreement = spearmanr(truth, order).statistic
            rng = random.Random(seed)
            wins = 0
            for _ in range(args.permutations):
                perm = truth[:]
                rng.shuffle(perm)
                wins += agreement > spearmanr(truth, perm).statistic
            print(
                f"rule {rule:3d} seed {seed}: rho(index, impact)={rho_impact:+.3f} "
                f"rho(order, truth)={agreement:+.3f} beats {wins}/{args.permutations}"
            )


if __name__ == "__main__":
    main()
