"""Sample surgery instances, apply the plan and check every postcondition.

Writes one JSONL line per instance and keeps the SVG pair of the first one.
"""

import argparse
import json
from pathlib import Path

from mirrorlab.lattice import Band
from mirrorlab.montecarlo import append_jsonl
from mirrorlab.render import render, save_svg
from mirrorlab.surgery import apply, instances, verify_surgery
from mirrorlab.tracer import trace

DEFAULTS = {"lorentz": (1, 20, 0.5), "manhattan": (2, 40, 0.45)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", choices=sorted(DEFAULTS), default="lorentz")
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out-dir", default="surgery_out")
    args = ap.parse_args()

    n, N, p = DEFAULTS[args.model]
    width = N // 5
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    failures = 0
    gen = instances(args.model, n, N, p, args.seed, width, 2 * width)
    for k, (r, c, plan) in zip(range(args.count), gen):
        c2 = apply(c, plan)
        rep = verify_surgery(c, c2, plan, N)
        failures += not rep.passed
        append_jsonl(out / "instances.jsonl", {"replicate": r, "passed": rep.passed, "checks": rep.checks})
        if k == 0:
            save_svg(out / "before.svg", render(c, [plan.L1, plan.L2, plan.loop], title="before"))
            after = [trace(t.initial_edge, c2, Band(0, N)) for t in (plan.L1, plan.L2)]
            save_svg(out / "after.svg", render(c2, after, title="after"))
    print(json.dumps({"model": args.model, "instances": args.count, "failures": failures}))
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
