"""Event detectors.

Existential events return ``holds=True`` with a witness trajectory.
Universal events (every trajectory from a set of edges stays in a region)
return ``holds=False`` with the first escaping trajectory, in a fixed edge
order, as witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Optional, Sequence

import numpy as np
from networkx.utils import UnionFind

from . import _kernels
from .lattice import (
    Band,
    Box,
    DirectedEdge,
    Direction,
    Geometry,
    Point,
    Rectangle,
    bottom_edges,
    rectangle,
)
from .mirrors import Configuration, ModelKind
from .tracer import Status, Trajectory, _kernel_bounds, is_manhattan, trace

_NOREC = np.empty((0, 3), dtype=np.int64)


@dataclass
class EventOutcome:
    name: str
    holds: bool
    witness: Any = None
    steps_used: int = 0
    params: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds

    def report(self) -> dict:
        w = self.witness
        if isinstance(w, Trajectory):
            w = {"initial_edge": str(w.initial_edge), "length": w.length, "status": w.status.value}
        elif w is not None and not isinstance(w, (int, str)):
            w = repr(w)
        return {"event": self.name, "params": self.params, "holds": self.holds,
                "witness": w, "steps": self.steps_used}


def _fast(c: Configuration, e: DirectedEdge, kb, cap: int):
    status, n, lx, ly, ld = _kernels.trace_kernel(
        c.states, c.x0, c.y0, c.geometry.circumference or 0, *kb,
        e.src.x, e.src.y, int(e.heading), cap, _NOREC,
    )
    return status, n, (lx, ly, ld)


def _starts_array(edges) -> np.ndarray:
    if isinstance(edges, np.ndarray):
        return edges
    return np.array([(e.src.x, e.src.y, int(e.heading)) for e in edges],
                    dtype=np.int64).reshape(-1, 3)


def _row_edge(row) -> DirectedEdge:
    return DirectedEdge(Point(int(row[0]), int(row[1])), Direction(int(row[2])))


def _first_escape(c: Configuration, starts: Sequence[DirectedEdge], bound) -> tuple[int, int]:
    kb = _kernel_bounds(bound)
    cap = 4 * bound.size(c.geometry) + 8
    k, total = _kernels.first_exit(
        c.states, c.x0, c.y0, c.geometry.circumference or 0, *kb,
        _starts_array(starts), cap,
    )
    return int(k), int(total)


# crossings ------------------------------------------------------------------


def detect_crossing(
    c: Configuration,
    I,
    J,
    require_same_x: bool = False,
    entry_x: Optional[int] = None,
    exit_x: Optional[int] = None,
) -> EventOutcome:
    """E_{I,J}: some trajectory enters R_{I,J} through a bottom edge and
    leaves through a top edge with its inner vertices inside R_{I,J}.

    ``require_same_x`` gives E'_{I,J}.  ``entry_x``/``exit_x`` pin the entry
    and exit columns, which is the event A_{i,j}.
    """
    R = I if isinstance(I, Rectangle) else rectangle(I, J)
    kb = R.bounds()
    cap = 4 * R.size() + 8
    starts = bottom_edges(R)
    if entry_x is not None:
        starts = [e for e in starts if e.src.x == entry_x]
    steps = 0
    for e in starts:
        status, n, (lx, ly, ld) = _fast(c, e, kb, cap)
        steps += n
        if status != _kernels.EXITED or ld != Direction.N or ly != R.y1:
            continue
        if require_same_x and lx != e.src.x:
            continue
        if exit_x is not None and lx != exit_x:
            continue
        return EventOutcome("crossing", True, trace(e, c, R, cap), steps, _crossing_params(R, require_same_x, entry_x, exit_x))
    return EventOutcome("crossing", False, None, steps, _crossing_params(R, require_same_x, entry_x, exit_x))


def _crossing_params(R, same_x, entry_x, exit_x) -> dict:
    out = {"rect": str(R), "same_x": same_x}
    if entry_x is not None:
        out["entry_x"] = entry_x
    if exit_x is not None:
        out["exit_x"] = exit_x
    return out


def crossing_exit_columns(c: Configuration, R: Rectangle) -> dict[int, Optional[int]]:
    """For each bottom-edge column, the top-edge column it exits through
    (None when it leaves R any other way)."""
    kb = R.bounds()
    cap = 4 * R.size() + 8
    out = {}
    for e in bottom_edges(R):
        status, _, (lx, ly, ld) = _fast(c, e, kb, cap)
        top = status == _kernels.EXITED and ld == Direction.N and ly == R.y1
        out[e.src.x] = lx if top else None
    return out


def detect_pinned(c: Configuration, I, J, i: int, j: int) -> EventOutcome:
    """A_{i,j}: the trajectory entering at column i leaves through the top at column j."""
    out = detect_crossing(c, I, J, entry_x=i, exit_x=j)
    out.name = "pinned_crossing"
    return out


# universal events on the plane ---------------------------------------------


def ring_order(box: Box) -> list[Point]:
    """Vertices of a box ordered by distance from the centre, then (x, y)."""
    pts = list(box.points())
    return sorted(pts, key=lambda q: (max(abs(q.x - box.cx), abs(q.y - box.cy)), q.x, q.y))


def box_edges(box: Box) -> list[DirectedEdge]:
    return [_row_edge(r) for r in _box_starts(box.k, box.cx, box.cy)]


@lru_cache(maxsize=32)
def _box_starts(k: int, cx: int, cy: int) -> np.ndarray:
    """Rows (x, y, heading) of all edges leaving Q_k(cx, cy), in ring order."""
    r = np.arange(-k, k + 1)
    dx, dy = np.meshgrid(r, r, indexing="ij")
    dx, dy = dx.ravel(), dy.ravel()
    order = np.lexsort((dy, dx, np.maximum(abs(dx), abs(dy))))
    pts = np.repeat(np.stack([dx[order] + cx, dy[order] + cy], axis=1), 4, axis=0)
    heads = np.tile(np.arange(4), len(order))[:, None]
    out = np.hstack([pts, heads]).astype(np.int64)
    out.setflags(write=False)
    return out


def detect_A(c: Configuration, m: int) -> EventOutcome:
    """A_m: every trajectory starting in Q_1 has all its vertices in Q_m."""
    if m < 1:
        raise ValueError("m must be positive")
    starts = _box_starts(1, 0, 0)
    bound = Box(m)
    k, steps = _first_escape(c, starts, bound)
    if k < 0:
        return EventOutcome("A", True, None, steps, {"m": m})
    return EventOutcome("A", False, trace(_row_edge(starts[k]), c, bound), steps, {"m": m})


def detect_annulus(c: Configuration, center, k: int) -> EventOutcome:
    """E^ann_k(center): a trajectory starts in Q_{floor(9k/10)}(center) and
    reaches outside Q_k(center)."""
    cx, cy = center
    starts = _box_starts((9 * k) // 10, cx, cy)
    bound = Box(k, cx, cy)
    idx, steps = _first_escape(c, starts, bound)
    params = {"center": [cx, cy], "k": k}
    if idx < 0:
        return EventOutcome("annulus", False, None, steps, params)
    return EventOutcome("annulus", True, trace(_row_edge(starts[idx]), c, bound), steps, params)


def splitting_rectangles(n: int) -> tuple[Rectangle, Rectangle, Rectangle, Rectangle]:
    """The four rotated copies of R_{1..100n, 1..n} crossing Q_40n minus Q_36n."""
    if n < 1:
        raise ValueError("n must be positive")
    long_ = (-50 * n, 50 * n - 1)
    return (
        rectangle(long_, (38 * n, 39 * n - 1)),
        rectangle(long_, (-38 * n, -37 * n - 1)),
        rectangle((-38 * n, -37 * n - 1), long_),
        rectangle((38 * n, 39 * n - 1), long_),
    )


def _short_axis(i: int) -> int:
    return 1 if i < 2 else 0  # R1, R2 are crossed in y; R3, R4 in x


def traverses(t: Trajectory, R: Rectangle, axis: int) -> Optional[tuple[int, int]]:
    """First contiguous stretch of ``t`` that enters R across one long side
    and leaves across the other with every vertex in between inside R.

    Returns (i, j): edge i enters and edge j leaves (0-based), or None.
    """
    lo, hi = (R.y0, R.y1) if axis == 1 else (R.x0, R.x1)
    seq = t.vertex_sequence()
    entry = None
    for i in range(len(seq) - 1):
        a, b = seq[i], seq[i + 1]
        ina, inb = R.contains(a), R.contains(b)
        ca, cb = a[axis], b[axis]
        if not ina and inb:
            entry = (i, ca) if ca in (lo - 1, hi + 1) and cb in (lo, hi) else None
        elif ina and not inb:
            if entry is not None:
                side_in = entry[1]
                if (side_in == lo - 1 and cb == hi + 1) or (side_in == hi + 1 and cb == lo - 1):
                    return entry[0], i
            entry = None
    return None


def check_annulus_traversal(t: Trajectory, n: int) -> Optional[int]:
    """Index (1..4) of a splitting rectangle that ``t`` crosses in its short
    direction.  ``t`` must start in Q_36n and end outside Q_40n."""
    if not Box(36 * n).contains(t.start) or Box(40 * n).contains(t.end):
        raise ValueError("trajectory must start in Q_36n and end outside Q_40n")
    for i, R in enumerate(splitting_rectangles(n)):
        if traverses(t, R, _short_axis(i)) is not None:
            return i + 1
    return None


# tamed boxes ------------------------------------------------------------------


def box_center_index(q: Point, n: int) -> tuple[int, int]:
    """(a, b) with q in Q_25n(50na, 50nb), hence in the core Q_36n."""
    s = 50 * n
    return (int(np.floor(q.x / s + 0.5)), int(np.floor(q.y / s + 0.5)))


def tamed_box_path(t: Trajectory, n: int) -> list[tuple[int, int]]:
    """Box indices visited by ``t``, consecutive duplicates removed."""
    path = []
    for q in t.vertex_sequence():
        b = box_center_index(q, n)
        if not path or path[-1] != b:
            path.append(b)
    return path


def is_tamed(c: Configuration, index: tuple[int, int], n: int, witness: Optional[DirectedEdge] = None) -> bool:
    """Whether the box Q_40n(50na, 50nb) is tamed, i.e. E^ann_40n holds there.

    With ``witness``, only that edge is traced (a certificate check).
    """
    a, b = index
    center = (50 * n * a, 50 * n * b)
    if witness is None:
        return detect_annulus(c, center, 40 * n).holds
    inner = Box(36 * n, *center)
    if not inner.contains(witness.src):
        return False
    return trace(witness, c, Box(40 * n, *center)).exited


# cylinder events --------------------------------------------------------------


def is_N_good(S, n: int, N: int) -> bool:
    """Whether removing S from the cylinder separates (0, n) from (N+1, n).

    The half-cylinders x <= 0 and x >= N+1 are connected, so it suffices to
    test connectivity inside the band {0..N+1} x (Z/2nZ).
    """
    S = set(map(tuple, S))
    w = 2 * n
    uf = UnionFind()
    for x in range(0, N + 2):
        for y in range(1, w + 1):
            if (x, y) in S:
                continue
            uf[(x, y)]
            right = (x + 1, y)
            up = (x, y % w + 1)
            if x + 1 <= N + 1 and right not in S:
                uf.union((x, y), right)
            if up not in S:
                uf.union((x, y), up)
    return uf[(0, n)] != uf[(N + 1, n)]


def wind_band(ell: int, n: int, width: Optional[int] = None, spacing: Optional[int] = None) -> Band:
    """T_{ell*spacing, ell*spacing + width}; defaults are 100n and 200n."""
    width = 100 * n if width is None else width
    spacing = 200 * n if spacing is None else spacing
    return Band(ell * spacing, ell * spacing + width)


def wind_bands(n: int, N: int, width: int, spacing: int) -> list[tuple[int, Band]]:
    """All (ell, band) with ell >= 1 and the band inside {1..N}."""
    out = []
    ell = 1
    while ell * spacing + width <= N:
        out.append((ell, wind_band(ell, n, width, spacing)))
        ell += 1
    return out


def closed_orbits(c: Configuration, band: Band):
    """Closed trajectories with every vertex inside ``band``, one per orbit,
    each traced from its smallest edge in (x, y, heading) order."""
    g = c.geometry
    cap = 4 * band.size(g) + 8
    seen = set()
    for q in band.points(g):
        for d in Direction:
            e = DirectedEdge(q, d)
            if (q.x, q.y, int(d)) in seen:
                continue
            t = trace(e, c, band, cap)
            seen.update(map(tuple, t.path.tolist()))
            if t.closed:
                yield t


def detect_wind(c: Configuration, n: int, N: int, band: Band) -> EventOutcome:
    """E^wind: a closed trajectory inside ``band`` whose vertex set is N-good."""
    g = c.geometry
    if not g.is_cylinder or g.circumference != 2 * n:
        raise ValueError(f"detect_wind needs a cylinder of circumference {2 * n}")
    if band.k1 < 0 or band.k2 > N:
        raise ValueError(f"band {band} does not lie inside 1..{N}")
    steps = 0
    params = {"n": n, "N": N, "band": str(band)}
    for t in closed_orbits(c, band):
        steps += t.length
        if is_N_good(t.vertices(), n, N):
            return EventOutcome("wind", True, t, steps, params)
    return EventOutcome("wind", False, None, steps, params)


def wrap_rectangle(c: Configuration, n: int, offset: int = 0) -> Configuration:
    """Glue the bottom and top edges of a height-2n rectangle configuration.

    The rectangle R_{x0..x1, 1..2n} becomes the band T_{x0-1+offset, x1+offset}
    of the cylinder Z x (Z/2nZ): rows stay rows and x shifts by ``offset``.
    """
    R = c.support
    if not isinstance(R, Rectangle) or c.geometry.is_cylinder:
        raise ValueError("wrap_rectangle needs a rectangle configuration on the plane")
    if R.y0 != 1 or R.y1 != 2 * n:
        raise ValueError(f"rectangle rows must be 1..{2 * n}, got {R.y0}..{R.y1}")
    if c.model is ModelKind.MANHATTAN and offset % 2:
        raise ValueError("Manhattan wrapping needs an even offset to keep parities")
    g = Geometry.cylinder(2 * n)
    band = Band(R.x0 - 1 + offset, R.x1 + offset)
    return Configuration(g, c.model, band, np.array(c.states), R.x0 + offset, 1, c.p)


@dataclass
class StripClassification:
    """Trajectories of the strip T_{0,N} entering from E+_l or E-_r."""

    N: int
    left_right: list = field(default_factory=list)
    right_left: list = field(default_factory=list)
    left_left: list = field(default_factory=list)
    right_right: list = field(default_factory=list)
    unclassified: list = field(default_factory=list)

    CLASSES = ("left_right", "right_left", "left_left", "right_right")

    def counts(self) -> dict[str, int]:
        return {k: len(getattr(self, k)) for k in self.CLASSES + ("unclassified",)}

    def manhattan(self) -> dict[str, list]:
        return {k: [t for t in getattr(self, k) if is_manhattan(t)] for k in self.CLASSES}

    def manhattan_counts(self) -> dict[str, int]:
        return {k: len(v) for k, v in self.manhattan().items()}


def entry_edges(w: int, N: int) -> tuple[list[DirectedEdge], list[DirectedEdge]]:
    """(E+_l, E-_r) in ascending y."""
    left = [DirectedEdge(Point(0, y), Direction.E) for y in range(1, w + 1)]
    right = [DirectedEdge(Point(N + 1, y), Direction.W) for y in range(1, w + 1)]
    return left, right


def _class_of(t: Trajectory, from_left: bool, N: int) -> str:
    if t.status is not Status.EXITED:
        return "unclassified"
    x, y, d = t.last
    if x == 1 and d == Direction.W:
        return "left_left" if from_left else "right_left"
    if x == N and d == Direction.E:
        return "left_right" if from_left else "right_right"
    return "unclassified"


def classify_strip(c: Configuration, N: int) -> StripClassification:
    """Trace every edge of E+_l and E-_r through the band {1..N}.

    The circumference comes from the configuration, so odd widths work for
    the Lorentz model as well.
    """
    g = c.geometry
    if not g.is_cylinder:
        raise ValueError("classify_strip needs a cylinder configuration")
    bound = Band(0, N)
    out = StripClassification(N)
    left, right = entry_edges(g.circumference, N)
    for from_left, edges in ((True, left), (False, right)):
        for e in edges:
            t = trace(e, c, bound)
            getattr(out, _class_of(t, from_left, N)).append(t)
    return out


def strip_counts(c: Configuration, N: int) -> dict[str, int]:
    """Class counts plus Manhattan-restricted counts, without recording paths.

    A trajectory of the Manhattan model is Manhattan iff its initial edge
    is, so Manhattan entries are the odd rows on the left and the even rows
    on the right.
    """
    g = c.geometry
    w = g.circumference
    kb = _kernel_bounds(Band(0, N))
    cap = 16 * w * N + 16
    counts = dict.fromkeys(StripClassification.CLASSES + ("unclassified",), 0)
    mcounts = dict.fromkeys(StripClassification.CLASSES, 0)
    left, right = entry_edges(w, N)
    for from_left, edges in ((True, left), (False, right)):
        for e in edges:
            status, _, (x, _, d) = _fast(c, e, kb, cap)
            if status != _kernels.EXITED:
                cls = "unclassified"
            elif x == 1 and d == Direction.W:
                cls = "left_left" if from_left else "right_left"
            elif x == N and d == Direction.E:
                cls = "left_right" if from_left else "right_right"
            else:
                cls = "unclassified"
            counts[cls] += 1
            if cls != "unclassified" and (e.src.y % 2 == 1) == from_left:
                mcounts[cls] += 1
    counts.update({f"manhattan_{k}": v for k, v in mcounts.items()})
    return counts


def section_edges(w: int, x: int = 0) -> list[DirectedEdge]:
    return [DirectedEdge(Point(x, y), d) for y in range(1, w + 1) for d in Direction]


def detect_B(c: Configuration, n: int, M: int) -> EventOutcome:
    """B_n^(M): every trajectory through the section x = 0 stays in -M..M."""
    g = c.geometry
    if not g.is_cylinder or g.circumference != 2 * n:
        raise ValueError(f"detect_B needs a cylinder of circumference {2 * n}")
    starts = section_edges(g.circumference)
    bound = Band(-M - 1, M)
    k, steps = _first_escape(c, starts, bound)
    params = {"n": n, "M": M}
    if k < 0:
        return EventOutcome("B", True, None, steps, params)
    return EventOutcome("B", False, trace(starts[k], c, bound), steps, params)


def section_extent(c: Configuration, M: int) -> int:
    """Largest |x| reached by orbits through x = 0, or M+1 if one leaves -M..M.

    All B_n^(M') for M' <= M follow from one call: B holds iff extent <= M'.
    """
    g = c.geometry
    if not g.is_cylinder or c.y0 != 1:
        raise ValueError("section_extent needs a cylinder configuration")
    return int(_kernels.section_extent(c.states, c.x0, g.circumference, M))
