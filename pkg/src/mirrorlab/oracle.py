"""Exact event probabilities by brute-force enumeration of small regions.

With a rational p (int or Fraction) every sum is an exact Fraction; with a
float p the weights are added by ``math.fsum`` and an error bound of
``count * 2**-52`` is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .events import classify_strip, crossing_exit_columns, detect_crossing, strip_counts
from .lattice import Band, Geometry, Rectangle, rectangle
from .mirrors import Configuration, ModelKind, enumerate_configurations, enumeration_size, reflect_vertical, dumps


def _rational(p):
    return isinstance(p, (int, Fraction))


def _prob(p):
    return Fraction(p) if _rational(p) else float(p)


@dataclass
class ExactResult:
    probability: object
    config_count: int
    region: str
    event: str
    exact: bool = True
    error_bound: float = 0.0

    def __float__(self) -> float:
        return float(self.probability)


def exact_probability(region, g: Geometry, model, p, event: Callable[[Configuration], bool],
                      name: Optional[str] = None) -> ExactResult:
    p = _prob(p)
    exact = _rational(p)
    hits, count = [], 0
    for c, w in enumerate_configurations(region, g, model, p):
        count += 1
        if event(c):
            hits.append(w)
    prob = sum(hits, Fraction(0)) if exact else math.fsum(hits)
    return ExactResult(prob, count, str(region), name or getattr(event, "__name__", "event"),
                       exact, 0.0 if exact else count * 2.0**-52)


@dataclass
class PairTable:
    m: int
    n: int
    model: ModelKind
    matrix: list  # matrix[i-1][j-1] = P(A_{i,j})
    union: object  # P(union of all A_{i,j}) accumulated per configuration

    @property
    def symmetric(self) -> bool:
        return all(self.matrix[i][j] == self.matrix[j][i]
                   for i in range(self.m) for j in range(self.m))


def exact_pair_table(m: int, n: int, model, p) -> PairTable:
    """P(A_{i,j}) on R_{1..m, 1..n} for all entry/exit columns i, j."""
    p = _prob(p)
    R = rectangle((1, m), (1, n))
    zero = Fraction(0) if _rational(p) else 0.0
    mat = [[zero] * m for _ in range(m)]
    union = zero
    for c, w in enumerate_configurations(R, Geometry.plane(), model, p):
        exits = crossing_exit_columns(c, R)
        hit = False
        for i, j in exits.items():
            if j is not None:
                mat[i - 1][j - 1] += w
                hit = True
        if hit:
            union += w
    return PairTable(m, n, ModelKind(model), mat, union)


def pinned_event(R: Rectangle, i: int, j: int) -> Callable[[Configuration], bool]:
    def event(c):
        return crossing_exit_columns(c, R)[i] == j
    event.__name__ = f"A_{i},{j}"
    return event


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {"check": self.name, "passed": self.passed, "checked": self.checked,
                "violations": len(self.violations), "details": self.details,
                "counterexamples": self.violations[:3]}


def exact_parity_check(w: int, N: int, model, p=Fraction(1, 2)) -> CheckReport:
    """Every configuration of the band {1..N} on the width-w cylinder:
    Lorentz left-right count is congruent to w mod 2; Manhattan
    left-right and right-left Manhattan counts agree."""
    model = ModelKind(model)
    g = Geometry.cylinder(w)
    rep = CheckReport(f"parity_{model.value}_w{w}_N{N}")
    histogram = {}
    for c, _ in enumerate_configurations(Band(0, N), g, model, p):
        rep.checked += 1
        cl = classify_strip(c, N)
        lr = len(cl.left_right)
        histogram[lr] = histogram.get(lr, 0) + 1
        bad = lr % 2 != w % 2 if model is ModelKind.LORENTZ else False
        if model is ModelKind.MANHATTAN:
            mc = cl.manhattan_counts()
            bad = mc["left_right"] != mc["right_left"]
        fast = strip_counts(c, N)
        bad |= fast["left_right"] != lr
        if bad:
            rep.violations.append(dumps(c))
    rep.details["left_right_histogram"] = dict(sorted(histogram.items()))
    return rep


def reflection_check(m: int, n: int, model, p) -> CheckReport:
    """The vertical reflection is a weight-preserving involution exchanging
    A_{i,j} and A_{j,i} on R_{1..m, 1..n}."""
    R = rectangle((1, m), (1, n))
    rep = CheckReport(f"reflection_{ModelKind(model).value}_m{m}_n{n}")
    for c, w in enumerate_configurations(R, Geometry.plane(), model, _prob(p)):
        rep.checked += 1
        phi = reflect_vertical(c)
        ok = reflect_vertical(phi) == c and phi.weight() == w
        a, b = crossing_exit_columns(c, R), crossing_exit_columns(phi, R)
        pairs = {(i, j) for i, j in a.items() if j is not None}
        swapped = {(j, i) for i, j in b.items() if j is not None}
        ok &= pairs == swapped
        if not ok:
            rep.violations.append(dumps(c))
    return rep


def exact_concatenation_check(m: int, n: int, model, p=Fraction(1, 2)) -> CheckReport:
    """On R_{1..m, 1..2n}: A_{i,j} on the lower half together with the
    shifted A_{j,i} on the upper half forces E'_{m,2n}."""
    R = rectangle((1, m), (1, 2 * n))
    lower = rectangle((1, m), (1, n))
    upper = rectangle((1, m), (n + 1, 2 * n))
    rep = CheckReport(f"concatenation_{ModelKind(model).value}_m{m}_n{n}")
    in_both = 0
    for c, _ in enumerate_configurations(R, Geometry.plane(), model, _prob(p)):
        rep.checked += 1
        lo, up = crossing_exit_columns(c, lower), crossing_exit_columns(c, upper)
        for i in range(1, m + 1):
            j = lo[i]
            if j is None or up[j] != i:
                continue
            in_both += 1
            if not detect_crossing(c, (1, m), (1, 2 * n), require_same_x=True).holds:
                rep.violations.append(dumps(c))
    rep.details["configs_in_intersection"] = in_both
    return rep


def union_check(m: int, n: int, model, p) -> CheckReport:
    """P(union of A_{i,j}) equals P(E_{m,n}) computed by the crossing detector."""
    table = exact_pair_table(m, n, model, p)
    R = rectangle((1, m), (1, n))
    direct = exact_probability(R, Geometry.plane(), model, p,
                               lambda c: detect_crossing(c, (1, m), (1, n)).holds, "E")
    rep = CheckReport(f"union_{ModelKind(model).value}_m{m}_n{n}", direct.config_count)
    rep.details = {"union": str(table.union), "E": str(direct.probability),
                   "symmetric": table.symmetric}
    if table.union != direct.probability or not table.symmetric:
        rep.violations.append(rep.details)
    return rep


# battery used by the CLI --------------------------------------------------------

def battery(suite: str = "all", max_cells: int = 8) -> list[CheckReport]:
    half = Fraction(1, 2)
    checks = [
        ("parity", 6, lambda: exact_parity_check(2, 3, "lorentz")),
        ("parity", 6, lambda: exact_parity_check(3, 2, "lorentz")),
        ("parity", 8, lambda: exact_parity_check(2, 4, "manhattan")),
        ("parity", 4, lambda: exact_parity_check(1, 4, "lorentz")),
        ("symmetry", 2, lambda: union_check(2, 1, "lorentz", Fraction(1, 3))),
        ("symmetry", 2, lambda: union_check(2, 1, "lorentz", half)),
        ("symmetry", 4, lambda: union_check(2, 2, "manhattan", half)),
        ("symmetry", 6, lambda: reflection_check(3, 2, "lorentz", half)),
        ("symmetry", 8, lambda: reflection_check(2, 4, "manhattan", half)),
        ("concatenation", 4, lambda: exact_concatenation_check(2, 1, "lorentz")),
        ("concatenation", 6, lambda: exact_concatenation_check(3, 1, "lorentz")),
        ("concatenation", 8, lambda: exact_concatenation_check(2, 2, "manhattan")),
    ]
    if suite not in ("all", "parity", "symmetry", "concatenation"):
        raise ValueError(f"unknown suite {suite!r}")
    return [run() for s, cells, run in checks
            if (suite == "all" or s == suite) and cells <= max_cells]
