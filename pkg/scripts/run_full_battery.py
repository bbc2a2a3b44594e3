#!/usr/bin/env python3
"""Run the full analysis battery on the bundled dataset.

Writes one run directory per experiment under runs/battery/. Heavier
defaults can be dialed down with --iterations (the leave-one-out pass in
particular trains one model per masked entity per seed).
"""

import argparse
import sys

from scorecast.cli import main as cli


def run(args):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/battery")
    parser.add_argument("--iterations", type=int, default=250_000)
    parser.add_argument("--loo-iterations", type=int, default=40_000)
    parser.add_argument("--seeds", default="5")
    parser.add_argument("--target", default="LLama-2-70B")
    parser.add_argument("--workers", type=int, default=None)
    opts = parser.parse_args(args)

    base = ["--iterations", str(opts.iterations), "--seeds", opts.seeds]
    workers = ["--workers", str(opts.workers)] if opts.workers else []
    steps = [
        ["validate"],
        ["eval", "--methods", "mf,ncf,ncf_factor,factor_only",
         "--out", f"{opts.out}/eval", *base],
        ["scenario", "--target", opts.target, "--scenario", "cpp0",
         "--out", f"{opts.out}/cpp0", *base],
        ["scenario", "--target", opts.target, "--scenario", "cpp2",
         "--out", f"{opts.out}/cpp2", *base],
        ["train", "--method", "ncf_factor", "--seed", "1",
         "--out", f"{opts.out}/train", "--iterations", str(opts.iterations)],
        ["shapley", "--checkpoint", f"{opts.out}/train/checkpoints/ncf_factor.npz",
         "--seed", "1", "--out", f"{opts.out}/shapley"],
        ["sparsity", "--levels", "0.496,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.888",
         "--method", "mf", "--out", f"{opts.out}/sparsity", *base],
        ["loo", "--axis", "models", "--seeds", "3", "--method", "ncf_factor",
         "--iterations", str(opts.loo_iterations),
         "--out", f"{opts.out}/loo", *workers],
    ]
    for step in steps:
        print(f"\n=== scorecast {' '.join(step)}")
        code = cli(step)
        if code != 0:
            print(f"step failed with exit code {code}", file=sys.stderr)
            return code
    print(f"\nbattery complete; results under {opts.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(run(sys.argv[1:]))
