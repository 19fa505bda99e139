"""Seeded Monte Carlo estimation.

Replicate r of a run with root seed s draws its configuration from the
derived seed ``derive(s, r)``, so a result depends only on (s, parameters,
replicate count) and never on chunking or the number of worker processes.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from statsmodels.stats.proportion import proportion_confint

from . import __version__, _kernels
from .events import (EventOutcome, detect_A, detect_annulus, detect_B, detect_crossing,
                     detect_pinned, detect_wind, strip_counts)
from .lattice import Band, Box, Geometry, rectangle
from .mirrors import ModelKind, from_states, sample_batch
from .rng import derive_array

ENGINE_VERSION = f"mirrorlab-{__version__}"
EVENT_KINDS = ("crossing", "pinned", "A", "annulus", "B", "wind", "strip_lr")
CHUNK = 2048


@dataclass(frozen=True)
class EventSpec:
    """A named event together with the region its configurations live on.

    kinds and their params:
      crossing   I, J, same_x=False, entry_x=None, exit_x=None  (plane)
      pinned     I, J, i, j  -- enter at column i, leave at j  (plane)
      A          m                                              (plane)
      annulus    k, center=(0, 0)                               (plane)
      B          n, M                                           (cylinder 2n)
      wind       n, N, band=(k1, k2)                            (cylinder 2n)
      strip_lr   w, N  -- at least one left-right trajectory    (cylinder w)
    """

    kind: str
    model: str = "lorentz"
    params: dict = field(default_factory=dict)

    def geometry(self) -> Geometry:
        k, P = self.kind, self.params
        if k in ("B", "wind"):
            return Geometry.cylinder(2 * P["n"])
        if k == "strip_lr":
            return Geometry.cylinder(P["w"])
        return Geometry.plane()

    def region(self):
        k, P = self.kind, self.params
        if k in ("crossing", "pinned"):
            return rectangle(P["I"], P["J"])
        if k == "A":
            return Box(P["m"])
        if k == "annulus":
            cx, cy = P.get("center", (0, 0))
            return Box(P["k"], cx, cy)
        if k == "B":
            return Band(-P["M"] - 2, P["M"] + 1)
        if k == "wind":
            return Band(*P["band"])
        if k == "strip_lr":
            return Band(-1, P["N"] + 1)
        raise ValueError(f"unknown event kind {k!r}")

    def outcome(self, c) -> EventOutcome:
        k, P = self.kind, self.params
        if k == "crossing":
            return detect_crossing(c, P["I"], P["J"], P.get("same_x", False),
                                   P.get("entry_x"), P.get("exit_x"))
        if k == "pinned":
            return detect_pinned(c, P["I"], P["J"], P["i"], P["j"])
        if k == "A":
            return detect_A(c, P["m"])
        if k == "annulus":
            return detect_annulus(c, P.get("center", (0, 0)), P["k"])
        if k == "B":
            return detect_B(c, P["n"], P["M"])
        if k == "wind":
            return detect_wind(c, P["n"], P["N"], Band(*P["band"]))
        if k == "strip_lr":
            counts = strip_counts(c, P["N"])
            return EventOutcome("strip_lr", counts["left_right"] > 0, counts["left_right"],
                                params={"N": P["N"]})
        raise ValueError(f"unknown event kind {k!r}")

    def evaluate(self, c) -> bool:
        return bool(self.outcome(c).holds)

    def describe(self) -> dict:
        return {"kind": self.kind, "model": self.model,
                **{k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}}


def wilson(successes: int, replicates: int, level: float) -> tuple[float, float]:
    lo, hi = proportion_confint(successes, replicates, alpha=1 - level, method="wilson")
    # statsmodels leaves ~1e-17 of roundoff at k = 0 and k = n
    q = successes / replicates
    return min(max(0.0, float(lo)), q), max(min(1.0, float(hi)), q)


@dataclass
class EstimateRecord:
    event: dict
    p: float
    replicates: int
    successes: int
    estimate: float
    ci95: tuple
    ci999: tuple
    root_seed: int
    wall_time: float = 0.0
    engine: str = ENGINE_VERSION

    @classmethod
    def build(cls, event: dict, p, replicates: int, successes: int, root_seed: int,
              wall_time: float = 0.0) -> "EstimateRecord":
        if not 0 <= successes <= replicates or replicates < 1:
            raise ValueError("need 0 <= successes <= replicates and replicates >= 1")
        return cls(event, float(p), replicates, successes, successes / replicates,
                   wilson(successes, replicates, 0.95), wilson(successes, replicates, 0.999),
                   int(root_seed), wall_time)

    def payload(self) -> dict:
        """Everything except the wall-clock time; bit-identical on replay."""
        d = asdict(self)
        d.pop("wall_time")
        d["ci95"], d["ci999"] = list(self.ci95), list(self.ci999)
        return d

    def to_json(self) -> str:
        d = self.payload()
        d["wall_time"] = self.wall_time
        return json.dumps(d, sort_keys=True)

    def contains(self, value: float, level: str = "ci999") -> bool:
        lo, hi = getattr(self, level)
        return lo <= value <= hi


def replicate_seeds(root: int, start: int, stop: int) -> np.ndarray:
    return derive_array(np.uint64(root), np.arange(start, stop, dtype=np.int64))


def _chunks(replicates: int, size: int = CHUNK):
    return [(a, min(a + size, replicates)) for a in range(0, replicates, size)]


def _map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, jobs))


def _estimate_chunk(job) -> int:
    spec, p, root, a, b = job
    region, g = spec.region(), spec.geometry()
    states = sample_batch(region, g, spec.model, p, replicate_seeds(root, a, b))
    hits = 0
    for k in range(b - a):
        c = from_states(region, g, spec.model, p, states[k])
        hits += bool(spec.evaluate(c))
    return hits


def estimate(spec: EventSpec, p, replicates: int, root_seed: int, workers: int = 1) -> EstimateRecord:
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    t0 = time.perf_counter()
    jobs = [(spec, p, root_seed, a, b) for a, b in _chunks(replicates)]
    hits = sum(_map(_estimate_chunk, jobs, workers))
    return EstimateRecord.build({**spec.describe(), "p": float(p)}, p, replicates, hits,
                                root_seed, time.perf_counter() - t0)


# localization ---------------------------------------------------------------------


@dataclass
class ExpFit:
    rate: float
    intercept: float
    r2: float
    points: int

    @property
    def length(self) -> float:
        return 1.0 / self.rate if self.rate > 0 else float("inf")


@dataclass
class LocalizationProfile:
    n: int
    p: float
    model: str
    Ms: list
    records: list
    fit: Optional[ExpFit]
    escapes: list

    def rows(self) -> list[dict]:
        return [{"n": self.n, "p": self.p, "M": M, "replicates": r.replicates,
                 "escapes": r.successes, "p_hat": r.estimate, "ci_lo": r.ci95[0],
                 "ci_hi": r.ci95[1], "seed": r.root_seed}
                for M, r in zip(self.Ms, self.records)]

    def payload(self) -> dict:
        return {"n": self.n, "p": self.p, "model": self.model, "Ms": list(self.Ms),
                "records": [r.payload() for r in self.records],
                "fit": asdict(self.fit) if self.fit else None}


def _extent_chunk(job) -> np.ndarray:
    n, p, model, Mmax, root, a, b = job
    g = Geometry.cylinder(2 * n)
    region = Band(-Mmax - 2, Mmax + 1)
    states = sample_batch(region, g, model, p, replicate_seeds(root, a, b))
    return _kernels.batch_section_extent(states, -Mmax - 1, 2 * n, Mmax)


def section_extents(n: int, p, Mmax: int, replicates: int, root_seed: int,
                    model="lorentz", workers: int = 1) -> np.ndarray:
    """Per replicate, the largest |x| reached by an orbit through x = 0
    (Mmax + 1 when one leaves -Mmax..Mmax)."""
    model = ModelKind(model).value
    jobs = [(n, p, model, Mmax, root_seed, a, b) for a, b in _chunks(replicates)]
    return np.concatenate(_map(_extent_chunk, jobs, workers))


def exp_fit(Ms: Sequence[int], successes: Sequence[int], replicates: int,
            min_escapes: int = 10) -> Optional[ExpFit]:
    """Least-squares fit of log(p_hat) = intercept - rate * M over points
    with at least ``min_escapes`` escapes."""
    pts = [(M, s / replicates) for M, s in zip(Ms, successes) if s >= min_escapes]
    if len(pts) < 2:
        return None
    x = np.array([m for m, _ in pts], dtype=float)
    y = np.log([q for _, q in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return ExpFit(float(-slope), float(intercept), r2, len(pts))


def localization_profile(n: int, p, Ms: Sequence[int], replicates: int, root_seed: int,
                         model="lorentz", workers: int = 1) -> LocalizationProfile:
    """Escape probabilities P(not B_n^(M)) for every M, coupled across M.

    Each replicate samples one configuration on the widest band and the
    escape indicator for M is ``extent > M``, so per replicate it is
    non-increasing in M.
    """
    Ms = sorted(int(M) for M in Ms)
    if not Ms or Ms[0] < 1:
        raise ValueError("M values must be positive")
    t0 = time.perf_counter()
    ext = section_extents(n, p, Ms[-1], replicates, root_seed, model, workers)
    flags = ext[:, None] > np.array(Ms)[None, :]
    assert not np.any(flags[:, 1:] & ~flags[:, :-1]), "coupled escapes must be monotone in M"
    escapes = [int(v) for v in flags.sum(axis=0)]
    wall = time.perf_counter() - t0
    model = ModelKind(model).value
    records = [EstimateRecord.build({"kind": "B_complement", "model": model, "n": n, "M": M,
                                     "p": float(p)}, p, replicates, s, root_seed, wall)
               for M, s in zip(Ms, escapes)]
    return LocalizationProfile(n, float(p), model, Ms, records,
                               exp_fit(Ms, escapes, replicates), escapes)


def crossing_scan(ns: Sequence[int], p, replicates: int, root_seed: int,
                  aspect: int = 100, model="lorentz", workers: int = 1) -> list[dict]:
    """Estimated P(E_{aspect*n, n}) for each n."""
    rows = []
    for n in ns:
        spec = EventSpec("crossing", ModelKind(model).value, {"I": (1, aspect * n), "J": (1, n)})
        r = estimate(spec, p, replicates, root_seed, workers)
        rows.append({"n": n, "width": aspect * n, "height": n, "p": float(p),
                     "replicates": replicates, "successes": r.successes, "p_hat": r.estimate,
                     "ci_lo": r.ci95[0], "ci_hi": r.ci95[1], "seed": root_seed})
    return rows


def write_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def append_jsonl(path, record: dict) -> None:
    with open(path, "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")
