"""Escape probability of a vertical section from the cylinder, as a function of M.

    python3 scripts/localization_profile.py --n 2 --p 0.5 --M 4,8,16,32,64,128 --reps 10000
"""

import argparse
import json
import time

from mirrorlab.montecarlo import append_jsonl, localization_profile, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", choices=["lorentz", "manhattan"], default="lorentz")
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--M", default="4,8,16,32,64,128", help="comma separated list")
    ap.add_argument("--reps", type=int, default=10**4)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", default="localization.csv")
    ap.add_argument("--jsonl", default="localization.jsonl")
    args = ap.parse_args()

    Ms = [int(m) for m in args.M.split(",")]
    t0 = time.perf_counter()
    prof = localization_profile(args.n, args.p, Ms, args.reps, args.seed, args.model, args.workers)
    write_csv(prof.rows(), args.csv)
    append_jsonl(args.jsonl, prof.payload() | {"wall_time": time.perf_counter() - t0})
    for row in prof.rows():
        print(f"M={row['M']:>5}  escapes={row['escapes']:>7}  p_hat={row['p_hat']:.5f}  "
              f"[{row['ci_lo']:.5f}, {row['ci_hi']:.5f}]")
    if prof.fit:
        print(f"rate {prof.fit.rate:.4f}  length {prof.fit.length:.2f}  R2 {prof.fit.r2:.4f}")
    else:
        print("too few escapes for an exponential fit")


if __name__ == "__main__":
    main()
