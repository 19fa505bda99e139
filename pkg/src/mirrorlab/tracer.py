"""Light propagation on a mirror configuration.

Convention: an NE mirror is the "/" diagonal (E<->N, W<->S) and an NW mirror
is the "\\" diagonal (E<->S, W<->N).  This is the only assignment under
which Manhattan mirrors (NW where x-y is even) send Manhattan-oriented
edges to Manhattan-oriented edges; ``manhattan_convention_cases`` checks it.

The successor map on directed edges is a bijection, so the first repeated
edge of any orbit is its initial edge.  ``trace`` therefore detects closure
by comparing against the starting edge only; ``debug=True`` keeps a visited
set and asserts this.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from . import _kernels
from .lattice import DX, DY, DirectedEdge, Direction, Geometry, Point, Region, head, parse_edge, reverse
from .mirrors import Configuration, MirrorState

RECORD_LIMIT = 10**6


class Status(str, Enum):
    CLOSED = "closed"
    EXITED = "exited"
    CAP_EXCEEDED = "cap_exceeded"


_STATUS = {_kernels.CLOSED: Status.CLOSED, _kernels.EXITED: Status.EXITED,
           _kernels.CAPPED: Status.CAP_EXCEEDED}


def reflect(d: Direction, s: MirrorState) -> Direction:
    d = Direction(d)
    if s == MirrorState.NW:
        return Direction(3 - d)
    if s == MirrorState.NE:
        return Direction(d ^ 1)
    return d


def successor(e: DirectedEdge, c: Configuration) -> DirectedEdge:
    v = head(e, c.geometry)
    return DirectedEdge(v, reflect(e.heading, c.state(v)))


def predecessor(e: DirectedEdge, c: Configuration) -> DirectedEdge:
    g = c.geometry
    return reverse(successor(reverse(e, g), c), g)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Edges e_1..e_m crossed in order, with how the trace stopped.

    ``path`` holds the first ``min(length, record_limit)`` edges as rows
    (x, y, heading); ``last`` is always e_m.
    """

    path: np.ndarray = field(repr=False)
    length: int
    status: Status
    geometry: Geometry
    last: tuple[int, int, int]

    @property
    def complete(self) -> bool:
        return self.path.shape[0] == self.length

    @property
    def closed(self) -> bool:
        return self.status is Status.CLOSED

    @property
    def exited(self) -> bool:
        return self.status is Status.EXITED

    def _row(self, i: int) -> DirectedEdge:
        x, y, d = self.path[i]
        return DirectedEdge(Point(int(x), int(y)), Direction(int(d)))

    @property
    def initial_edge(self) -> DirectedEdge:
        return self._row(0)

    @property
    def terminal_edge(self) -> DirectedEdge:
        x, y, d = self.last
        return DirectedEdge(Point(x, y), Direction(d))

    @property
    def start(self) -> Point:
        return self.initial_edge.src

    @property
    def end(self) -> Point:
        return head(self.terminal_edge, self.geometry)

    @property
    def edges(self) -> list[DirectedEdge]:
        self._need_complete()
        return [self._row(i) for i in range(self.length)]

    def _need_complete(self) -> None:
        if not self.complete:
            raise ValueError("trajectory was recorded in summary mode")

    def vertex_sequence(self) -> list[Point]:
        """u_1, u_2, ..., u_m, v_m in traversal order."""
        self._need_complete()
        seq = [Point(int(x), int(y)) for x, y, _ in self.path]
        seq.append(self.end)
        return seq

    def vertices(self) -> set[Point]:
        return set(self.vertex_sequence())

    def inner_vertices(self) -> set[Point]:
        """Endpoints of e_2..e_{m-1}."""
        seq = self.vertex_sequence()
        if self.length < 3:
            return set()
        return set(seq[1 : self.length])

    def key(self) -> tuple:
        self._need_complete()
        return tuple(map(tuple, self.path.tolist()))

    def reversed(self) -> "Trajectory":
        """The inverse trajectory rev(e_m), ..., rev(e_1)."""
        self._need_complete()
        g = self.geometry
        rows = []
        for e in reversed(self.edges):
            r = reverse(e, g)
            rows.append((r.src.x, r.src.y, int(r.heading)))
        path = np.array(rows, dtype=np.int64).reshape(-1, 3)
        return Trajectory(path, self.length, self.status, g, tuple(rows[-1]))

    def x_extent(self) -> tuple[int, int]:
        xs = [q.x for q in self.vertex_sequence()]
        return min(xs), max(xs)

    def to_lines(self) -> str:
        return "".join(f"{e}\n" for e in self.edges)

    @classmethod
    def from_edges(cls, edges: Sequence[DirectedEdge], geometry: Geometry,
                   status: Status = Status.EXITED) -> "Trajectory":
        rows = [(e.src.x, e.src.y, int(e.heading)) for e in edges]
        if not rows:
            raise ValueError("a trajectory has at least one edge")
        return cls(np.array(rows, dtype=np.int64), len(rows), Status(status), geometry, rows[-1])

    @classmethod
    def from_lines(cls, text: str, geometry: Geometry, status: Status = Status.EXITED) -> "Trajectory":
        """Inverse of ``to_lines``; the stopping status is not stored, so pass it."""
        return cls.from_edges([parse_edge(ln) for ln in text.splitlines() if ln.strip()],
                              geometry, status)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.status == other.status and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())


def default_cap(bound: Region, g: Geometry) -> int:
    return 16 * bound.size(g) + 16


def _kernel_bounds(bound: Region):
    b = bound.bounds()
    if b is None:
        return None
    xlo, xhi, ylo, yhi = b
    return (
        -_kernels.BIG if xlo is None else xlo,
        _kernels.BIG if xhi is None else xhi,
        -_kernels.BIG if ylo is None else ylo,
        _kernels.BIG if yhi is None else yhi,
    )


def trace(
    e0: DirectedEdge,
    c: Configuration,
    bound: Region,
    cap: Optional[int] = None,
    record_limit: int = RECORD_LIMIT,
    debug: bool = False,
) -> Trajectory:
    """Follow the light from ``e0`` until it leaves ``bound`` or closes.

    The trace stops with EXITED at the first edge whose end vertex lies
    outside ``bound`` (that edge is the terminal edge), with CLOSED when the
    next edge would be ``e0`` again, and with CAP_EXCEEDED after ``cap``
    edges.  ``e0`` may start outside ``bound``, as entry edges of a
    rectangle do.
    """
    g = c.geometry
    if cap is None:
        cap = default_cap(bound, g)
    if cap <= 0:
        raise ValueError("cap must be positive")
    e0 = DirectedEdge(g.canon(Point(*e0.src)), Direction(e0.heading))
    kb = _kernel_bounds(bound)
    if debug or kb is None:
        return _trace_python(e0, c, bound, cap, record_limit, debug)
    rec = np.empty((min(cap, record_limit), 3), dtype=np.int64)
    status, n, lx, ly, ld = _kernels.trace_kernel(
        c.states, c.x0, c.y0, g.circumference or 0, *kb,
        e0.src.x, e0.src.y, int(e0.heading), cap, rec,
    )
    return Trajectory(rec[: min(n, rec.shape[0])], int(n), _STATUS[status], g,
                      (int(lx), int(ly), int(ld)))


class BijectivityError(AssertionError):
    pass


def _trace_python(e0, c, bound, cap, record_limit, debug) -> Trajectory:
    g = c.geometry
    rows = []
    seen = {e0} if debug else None
    e = e0
    n = 0
    while True:
        if n >= cap:
            status = Status.CAP_EXCEEDED
            break
        if n < record_limit:
            rows.append((e.src.x, e.src.y, int(e.heading)))
        n += 1
        v = head(e, g)
        if not bound.contains(v, g):
            status = Status.EXITED
            break
        nxt = DirectedEdge(v, reflect(e.heading, c.state(v)))
        if nxt == e0:
            status = Status.CLOSED
            break
        if debug:
            if nxt in seen:
                raise BijectivityError(f"orbit of {e0} first repeats at {nxt}")
            seen.add(nxt)
        e = nxt
    path = np.array(rows, dtype=np.int64).reshape(-1, 3)
    return Trajectory(path, n, status, g, (e.src.x, e.src.y, int(e.heading)))


def is_manhattan(t: Trajectory) -> bool:
    """Every horizontal edge heads E on odd rows and W on even rows, every
    vertical edge heads S on odd columns and N on even columns."""
    for x, y, d in t.path.tolist():
        if d in (0, 2):
            if (d == 0) != (y % 2 == 1):
                return False
        elif (d == 3) != (x % 2 == 1):
            return False
    return True


def manhattan_edge_ok(e: DirectedEdge) -> bool:
    x, y = e.src
    if e.heading.horizontal:
        return (e.heading == Direction.E) == (y % 2 == 1)
    return (e.heading == Direction.S) == (x % 2 == 1)


def manhattan_convention_cases(nw_map=None, ne_map=None) -> dict:
    """Check a mirror convention against the Manhattan orientation rules.

    For each parity class of (x mod 2, y mod 2), every Manhattan-oriented
    edge into the vertex must leave it along a Manhattan-oriented edge under
    the parity-forced mirror.  ``nw_map``/``ne_map`` default to the package
    convention; returns {(x mod 2, y mod 2): bool}.
    """
    nw_map = nw_map or (lambda d: reflect(d, MirrorState.NW))
    ne_map = ne_map or (lambda d: reflect(d, MirrorState.NE))
    out = {}
    for px in (0, 1):
        for py in (0, 1):
            v = Point(px + 2, py + 2)
            mapping = nw_map if (v.x - v.y) % 2 == 0 else ne_map
            ok = True
            for d in Direction:
                u = Point(v.x - DX[d], v.y - DY[d])
                if not manhattan_edge_ok(DirectedEdge(u, d)):
                    continue
                out_d = Direction(mapping(d))
                ok &= manhattan_edge_ok(DirectedEdge(v, out_d))
                ok &= manhattan_edge_ok(DirectedEdge(v, d))  # empty vertex passes straight
            out[(px, py)] = ok
    return out


def successor_images(c: Configuration, edges: Iterable[DirectedEdge]) -> dict:
    return {e: successor(e, c) for e in edges}
