"""Crossing probability of long thin rectangles against their height.

For each n the rectangle is (aspect * n) wide and n tall; the event is a
trajectory entering the bottom side and leaving through the top.
"""

import argparse

from mirrorlab.montecarlo import append_jsonl, crossing_scan, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", choices=["lorentz", "manhattan"], default="lorentz")
    ap.add_argument("--ns", default="1,2,4,8")
    ap.add_argument("--p", type=float, default=0.5)
    ap.add_argument("--aspect", type=int, default=100)
    ap.add_argument("--reps", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", default="crossing.csv")
    ap.add_argument("--jsonl", default=None)
    args = ap.parse_args()

    ns = [int(x) for x in args.ns.split(",")]
    rows = crossing_scan(ns, args.p, args.reps, args.seed, aspect=args.aspect,
                         model=args.model, workers=args.workers)
    write_csv(rows, args.csv)
    for r in rows:
        if args.jsonl:
            append_jsonl(args.jsonl, r)
        print(f"{r['width']}x{r['height']}: {r['successes']}/{r['replicates']} = {r['p_hat']:.4f}")


if __name__ == "__main__":
    main()
