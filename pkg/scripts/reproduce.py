"""Regenerate every experiment artifact through the CLI.

Writes JSON (and CSV where tabular output makes sense) under ``results/``.
Sizes match the acceptance criteria; ``--quick`` shrinks them for a smoke run.
"""

import argparse
import os
import sys
import time

from tbdlab.cli import main as tbdlab

FULL = {
    "triangle": ["experiment", "triangle", "--trials", "2000"],
    "triangle_cube_root": ["experiment", "triangle", "--p-exponent", "-0.3333333333333333", "--trials", "2000"],
    "reverse_K3": ["experiment", "reverse", "--pattern", "K3", "--grid", "64,128,256,512", "--trials", "300"],
    "reverse_C4": ["experiment", "reverse", "--pattern", "C4", "--grid", "64,128,256,512", "--trials", "300"],
    "reverse_2K2": ["experiment", "reverse", "--pattern", "2K2", "--grid", "50,100,200,400", "--trials", "300", "--no-truncate"],
    "coupling": ["experiment", "coupling", "--n", "100", "--trials", "1000"],
    "lipschitz": ["experiment", "lipschitz", "--n", "60", "--trials", "1000"],
    "lipschitz_truncated": ["experiment", "lipschitz", "--n", "60", "--m", "600", "--trials", "1000"],
    "equivalence": ["experiment", "equivalence", "--trials", "10000"],
    "verify_product_spaces": ["verify", "--suite", "product-spaces", "--instances", "1000"],
    "verify_martingales": ["verify", "--suite", "martingales", "--instances", "200"],
}

QUICK = {
    "triangle": ["experiment", "triangle", "--n", "80", "--trials", "200"],
    "reverse_K3": ["experiment", "reverse", "--grid", "32,64,128", "--trials", "30"],
    "coupling": ["experiment", "coupling", "--n", "40", "--trials", "100"],
    "lipschitz": ["experiment", "lipschitz", "--n", "30", "--m", "250", "--trials", "100"],
    "equivalence": ["experiment", "equivalence", "--trials", "500"],
    "verify_product_spaces": ["verify", "--instances", "50"],
}

CSV = {"reverse_K3", "reverse_C4", "reverse_2K2"}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--parallelism", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--only", nargs="*", help="subset of experiment names")
    args = ap.parse_args()

    plan = QUICK if args.quick else FULL
    status = 0
    for name, argv in plan.items():
        if args.only and name not in args.only:
            continue
        common = ["--seed", str(args.seed), "--parallelism", str(args.parallelism)]
        t0 = time.perf_counter()
        if name in CSV:
            code = tbdlab(argv + common + ["--format", "csv", "--output", os.path.join(args.out, name + ".csv")])
        else:
            code = tbdlab(argv + common + ["--output", os.path.join(args.out, name + ".json")])
        print(f"{name:24s} exit={code} {time.perf_counter() - t0:7.1f}s", flush=True)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
