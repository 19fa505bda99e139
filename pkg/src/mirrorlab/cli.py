"""Command line driver: ``python -m mirrorlab <subcommand> ...``.

Every run appends one JSON record to an append-only log (``--log``, else
$MIRRORLAB_LOG, else ./experiments.jsonl).  Exit status is 0 on success,
1 when a verification fails and 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from . import montecarlo, oracle, render as svg
from .events import classify_strip, detect_wind, wind_band
from .lattice import Band, Geometry, parse_edge, parse_region
from .mirrors import ENUMERATION_LIMIT, ModelKind, RegionTooLarge, dumps, load, sample, save
from .montecarlo import ENGINE_VERSION, EventSpec
from .surgery import SurgeryError, apply, instances, verify_surgery
from .tracer import Status, Trajectory, is_manhattan, trace

LOG_ENV = "MIRRORLAB_LOG"
DEFAULT_LOG = "experiments.jsonl"


class UsageError(Exception):
    pass


@dataclass
class ExperimentRecord:
    subcommand: str
    params: dict
    root_seed: Optional[int]
    payload: dict
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)  # non-reproducible fields such as wall time
    engine: str = ENGINE_VERSION
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=str)


def digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def log_path(args) -> Path:
    return Path(args.log or os.environ.get(LOG_ENV) or DEFAULT_LOG)


# argument helpers -------------------------------------------------------------


def _interval(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return a, b


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y, got {text!r}") from None
    return a, b


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _prob(text: str) -> float:
    p = float(text)
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"p must lie in [0, 1], got {p}")
    return p


def _event_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--kind", required=True, choices=montecarlo.EVENT_KINDS)
    ap.add_argument("--I", type=_interval, help="column range lo:hi")
    ap.add_argument("--J", type=_interval, help="row range lo:hi")
    ap.add_argument("--same-x", action="store_true")
    ap.add_argument("--i", type=int, help="entry column (pinned)")
    ap.add_argument("--j", type=int, help="exit column (pinned)")
    ap.add_argument("--m", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--center", type=_pair, default=(0, 0))
    ap.add_argument("--n", type=int)
    ap.add_argument("--M", type=int)
    ap.add_argument("--N", type=int)
    ap.add_argument("--band", type=_interval, help="k1:k2 for wind")
    ap.add_argument("--w", type=int, help="cylinder width for strip_lr")


_REQUIRED = {
    "crossing": ("I", "J"),
    "pinned": ("I", "J", "i", "j"),
    "A": ("m",),
    "annulus": ("k",),
    "B": ("n", "M"),
    "wind": ("n", "N", "band"),
    "strip_lr": ("N",),
}


def event_spec(args, model: str, width: Optional[int] = None) -> EventSpec:
    need = _REQUIRED[args.kind]
    missing = [f"--{k}" for k in need if getattr(args, k) is None]
    if args.kind == "strip_lr" and width is None and args.w is None:
        missing.append("--w")
    if missing:
        raise UsageError(f"event {args.kind} needs {' '.join(missing)}")
    params = {k: getattr(args, k) for k in need}
    if args.kind == "crossing" and args.same_x:
        params["same_x"] = True
    if args.kind == "annulus":
        params["center"] = args.center
    if args.kind == "strip_lr":
        params["w"] = width if width is not None else args.w
    return EventSpec(args.kind, model, params)


def _load_config(path):
    try:
        return load(path)
    except FileNotFoundError:
        raise UsageError(f"no such configuration file: {path}") from None


def _traj_summary(t: Trajectory) -> dict:
    return {"status": t.status.value, "length": t.length, "initial_edge": str(t.initial_edge),
            "terminal_edge": str(t.terminal_edge), "manhattan": is_manhattan(t)}


# subcommands ----------------------------------------------------------------------
# Each returns (payload, exit code, inputs, outputs, extra).


def cmd_trace(args):
    c = _load_config(args.config)
    bound = parse_region(args.bound) if args.bound else c.support
    t = trace(parse_edge(args.start), c, bound, cap=args.cap)
    outputs = []
    if args.out:
        Path(args.out).write_text(t.to_lines())
        outputs.append(args.out)
    if args.svg:
        svg.save_svg(args.svg, svg.render(c, [t]))
        outputs.append(args.svg)
    return _traj_summary(t), 0, [args.config], outputs, {}


def cmd_sample(args):
    g = Geometry.parse(args.geometry)
    c = sample(parse_region(args.region), g, args.model, args.p, args.seed)
    outputs = []
    if args.out:
        save(c, args.out)
        outputs.append(args.out)
    else:
        sys.stdout.write(dumps(c))
    if args.svg:
        svg.save_svg(args.svg, svg.render(c))
        outputs.append(args.svg)
    payload = {"mirrors": c.mirror_count(), "sites": int(c.states.size), "weight": float(c.weight())}
    return payload, 0, [], outputs, {}


def cmd_event(args):
    c = _load_config(args.config)
    width = c.geometry.circumference if c.geometry.is_cylinder else None
    out = event_spec(args, c.model.value, width).outcome(c)
    return out.report(), 0, [args.config], [], {}


def cmd_classify(args):
    c = _load_config(args.config)
    cl = classify_strip(c, args.N)
    payload = {"N": args.N, "counts": cl.counts()}
    if c.model is ModelKind.MANHATTAN:
        payload["manhattan_counts"] = cl.manhattan_counts()
    return payload, 0, [args.config], [], {}


def cmd_wind(args):
    c = _load_config(args.config)
    if not c.geometry.is_cylinder:
        raise UsageError("wind needs a cylinder configuration")
    n = c.geometry.circumference // 2
    band = Band(*args.band) if args.band else wind_band(args.ell, n, args.width, args.spacing)
    return detect_wind(c, n, args.N, band).report(), 0, [args.config], [], {}


def cmd_surgery_demo(args):
    lorentz = args.model == "lorentz"
    n = args.n or (1 if lorentz else 2)
    N = args.N or (20 if lorentz else 40)
    p = args.p if args.p is not None else (0.5 if lorentz else 0.45)
    width = args.width or max(1, N // 5)
    spacing = args.spacing or 2 * width
    found = next(instances(args.model, n, N, p, args.seed, width, spacing, args.max_tries), None)
    if found is None:
        raise UsageError(f"no surgery instance within {args.max_tries} replicates")
    r, c, plan = found
    c2 = apply(c, plan)
    rep = verify_surgery(c, c2, plan, N)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {"before.cfg": dumps(c), "after.cfg": dumps(c2),
             "before.svg": svg.render(c, [plan.L1, plan.L2, plan.loop], title="before"),
             "after.svg": svg.render(c2, _after_paths(c2, plan, N), title="after")}
    for name, text in files.items():
        (out / name).write_text(text)
    payload = {"replicate": r, "n": n, "N": N, "p": p, "passed": rep.passed,
               "checks": rep.checks, "details": rep.details}
    if not rep.passed:
        sys.stderr.write(rep.dump() + "\n")
    return payload, 0 if rep.passed else 1, [], [str(out / k) for k in files], {}


def _after_paths(c2, plan, N):
    bound = Band(0, N)
    return [trace(plan.L1.initial_edge, c2, bound), trace(plan.L2.initial_edge, c2, bound)]


def cmd_verify_oracle(args):
    limit = max(ENUMERATION_LIMIT.values())
    if args.max_cells > limit:
        raise UsageError(f"--max-cells {args.max_cells} exceeds the enumeration limit of {limit} cells")
    reports = oracle.battery(args.suite, args.max_cells)
    ok = all(r.passed for r in reports)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} ({r.checked} configurations)", file=sys.stderr)
    payload = {"suite": args.suite, "passed": ok, "checks": [r.as_dict() for r in reports]}
    return payload, 0 if ok else 1, [], [], {}


def cmd_estimate(args):
    spec = event_spec(args, args.model)
    rec = montecarlo.estimate(spec, args.p, args.reps, args.seed, args.workers)
    return rec.payload(), 0, [], [], {"wall_time": rec.wall_time}


def cmd_localize(args):
    prof = montecarlo.localization_profile(args.n, args.p, args.M, args.reps, args.seed,
                                           args.model, args.workers)
    outputs = []
    if args.csv:
        montecarlo.write_csv(prof.rows(), args.csv)
        outputs.append(args.csv)
    return prof.payload(), 0, [], outputs, {"wall_time": prof.records[0].wall_time}


def cmd_render(args):
    c = _load_config(args.config)
    bound = parse_region(args.bound) if args.bound else c.support
    trajs = [trace(parse_edge(s), c, bound) for s in args.start or ()]
    inputs = [args.config]
    for path in args.trajectory or ():
        trajs.append(Trajectory.from_lines(Path(path).read_text(), c.geometry, Status.EXITED))
        inputs.append(path)
    doc = svg.render(c, trajs)
    svg.save_svg(args.out, doc)
    return svg.count_elements(doc), 0, inputs, [args.out], {}


# parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--log", help=f"JSONL experiment log (default ${LOG_ENV} or {DEFAULT_LOG})")
    common.add_argument("--no-log", action="store_true", help="do not append a record")

    ap = argparse.ArgumentParser(prog="mirrorlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=fn)
        return sp

    sp = add("trace", cmd_trace, "follow one trajectory")
    sp.add_argument("--config", required=True)
    sp.add_argument("--start", required=True, help='initial edge "x y E|N|W|S"')
    sp.add_argument("--bound", help="region, e.g. q:5, rect:0:9:0:4, band:0:20")
    sp.add_argument("--cap", type=int)
    sp.add_argument("--out", help="write the edges as 'x y H' lines")
    sp.add_argument("--svg")

    sp = add("sample", cmd_sample, "draw a random configuration")
    sp.add_argument("--model", choices=[m.value for m in ModelKind], default="lorentz")
    sp.add_argument("--geometry", default="plane", help="plane or cylinder:w")
    sp.add_argument("--region", required=True)
    sp.add_argument("--p", type=_prob, default=0.5)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out")
    sp.add_argument("--svg")

    sp = add("event", cmd_event, "evaluate an event on a configuration file")
    sp.add_argument("--config", required=True)
    _event_flags(sp)

    sp = add("classify", cmd_classify, "classify strip-crossing trajectories")
    sp.add_argument("--config", required=True)
    sp.add_argument("--N", type=int, required=True)

    sp = add("wind", cmd_wind, "look for an N-good closed orbit in a band")
    sp.add_argument("--config", required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--band", type=_interval)
    sp.add_argument("--ell", type=int, default=1)
    sp.add_argument("--width", type=int)
    sp.add_argument("--spacing", type=int)

    sp = add("surgery-demo", cmd_surgery_demo, "find, apply and verify one surgery")
    sp.add_argument("--model", choices=[m.value for m in ModelKind], default="lorentz")
    sp.add_argument("--n", type=int)
    sp.add_argument("--N", type=int)
    sp.add_argument("--p", type=_prob)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--width", type=int)
    sp.add_argument("--spacing", type=int)
    sp.add_argument("--max-tries", type=int, default=10**6)
    sp.add_argument("--out-dir", default="surgery_demo")

    sp = add("verify-oracle", cmd_verify_oracle, "run the exact-enumeration battery")
    sp.add_argument("--suite", choices=("all", "parity", "symmetry", "concatenation"), default="all")
    sp.add_argument("--max-cells", type=int, default=8)

    sp = add("estimate", cmd_estimate, "Monte Carlo estimate of an event probability")
    sp.add_argument("--model", choices=[m.value for m in ModelKind], default="lorentz")
    _event_flags(sp)
    sp.add_argument("--p", type=_prob, required=True)
    sp.add_argument("--reps", type=int, default=10**4)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)

    sp = add("localize", cmd_localize, "escape probability profile on the cylinder")
    sp.add_argument("--model", choices=[m.value for m in ModelKind], default="lorentz")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=_prob, required=True)
    sp.add_argument("--M", type=_int_list, required=True, help="comma separated, e.g. 4,8,16")
    sp.add_argument("--reps", type=int, default=10**4)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--csv")

    sp = add("render", cmd_render, "draw a configuration and trajectories as SVG")
    sp.add_argument("--config", required=True)
    sp.add_argument("--start", action="append", help='trace from "x y H" (repeatable)')
    sp.add_argument("--bound")
    sp.add_argument("--trajectory", action="append", help="file of 'x y H' lines (repeatable)")
    sp.add_argument("--out", required=True)
    return ap


_NOT_PARAMS = {"func", "log", "no_log"}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        payload, code, inputs, outputs, extra = args.func(args)
    except (UsageError, RegionTooLarge, SurgeryError, ValueError, OSError) as exc:
        print(f"mirrorlab {args.command}: error: {exc}", file=sys.stderr)
        return 2
    params = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMS}
    rec = ExperimentRecord(
        args.command, params, getattr(args, "seed", None), payload,
        {str(p): digest(p) for p in inputs}, {str(p): digest(p) for p in outputs}, extra,
    )
    print(json.dumps(payload, sort_keys=True, default=str))
    if not args.no_log:
        with open(log_path(args), "a") as fh:
            fh.write(rec.to_json() + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
