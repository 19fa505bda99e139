"""Geometry primitives: points, headings, directed edges and regions.

Two geometries are supported, the plane Z^2 and the cylinder Z x (Z/wZ).
On a cylinder the y coordinate is always stored in the canonical range
1..w, so coordinates written as (x, y) with 1 <= y <= w can be used as-is.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Iterator, NamedTuple, Optional, Union


class Direction(IntEnum):
    E = 0
    N = 1
    W = 2
    S = 3

    @property
    def dx(self) -> int:
        return DX[self]

    @property
    def dy(self) -> int:
        return DY[self]

    def reverse(self) -> "Direction":
        return Direction((self + 2) % 4)

    @property
    def horizontal(self) -> bool:
        return self in (Direction.E, Direction.W)


DX = (1, 0, -1, 0)
DY = (0, 1, 0, -1)


class Point(NamedTuple):
    x: int
    y: int


class DirectedEdge(NamedTuple):
    src: Point
    heading: Direction

    def __str__(self) -> str:
        return f"{self.src.x} {self.src.y} {self.heading.name}"


def edge(x: int, y: int, heading: Union[Direction, str, int]) -> DirectedEdge:
    """Shorthand constructor: ``edge(0, 0, "E")``."""
    if isinstance(heading, str):
        heading = Direction[heading]
    return DirectedEdge(Point(x, y), Direction(heading))


def parse_edge(text: str) -> DirectedEdge:
    """Parse ``"x y H"`` with H one of E, N, W, S."""
    try:
        x, y, h = text.split()
        return edge(int(x), int(y), h.upper())
    except (ValueError, KeyError):
        raise ValueError(f"bad edge {text!r}, expected 'x y E|N|W|S'") from None


@dataclass(frozen=True)
class Geometry:
    kind: str  # "plane" | "cylinder"
    circumference: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("plane", "cylinder"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.kind == "cylinder":
            if self.circumference is None or self.circumference < 1:
                raise ValueError("cylinder circumference must be >= 1")
        elif self.circumference is not None:
            raise ValueError("plane geometry takes no circumference")

    @classmethod
    def plane(cls) -> "Geometry":
        return cls("plane")

    @classmethod
    def cylinder(cls, w: int) -> "Geometry":
        return cls("cylinder", int(w))

    @property
    def is_cylinder(self) -> bool:
        return self.kind == "cylinder"

    def canon(self, p: Point) -> Point:
        if self.kind == "cylinder":
            return Point(p.x, (p.y - 1) % self.circumference + 1)
        return Point(p.x, p.y)

    def __str__(self) -> str:
        return "plane" if self.kind == "plane" else f"cylinder:{self.circumference}"

    @classmethod
    def parse(cls, text: str) -> "Geometry":
        if text == "plane":
            return cls.plane()
        kind, _, w = text.partition(":")
        if kind != "cylinder" or not w:
            raise ValueError(f"bad geometry {text!r}")
        return cls.cylinder(int(w))


def step(p: Point, d: Direction, g: Geometry) -> Point:
    return g.canon(Point(p.x + DX[d], p.y + DY[d]))


def head(e: DirectedEdge, g: Geometry) -> Point:
    """End vertex of a directed edge."""
    return step(e.src, e.heading, g)


def reverse(e: DirectedEdge, g: Geometry) -> DirectedEdge:
    return DirectedEdge(head(e, g), e.heading.reverse())


# Regions.  All are closed sets.  ``bounds`` returns (xlo, xhi, ylo, yhi),
# inclusive, with None for an unbounded side; regions that are not
# axis-aligned boxes return None.


@dataclass(frozen=True)
class Rectangle:
    """R_{I,J} with I = x0..x1 and J = y0..y1 (inclusive)."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise ValueError("rectangle intervals must be nonempty")

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1

    def contains(self, p: Point, g: Optional[Geometry] = None) -> bool:
        return self.x0 <= p.x <= self.x1 and self.y0 <= p.y <= self.y1

    def bounds(self):
        return (self.x0, self.x1, self.y0, self.y1)

    def points(self, g: Optional[Geometry] = None) -> Iterator[Point]:
        for x in range(self.x0, self.x1 + 1):
            for y in range(self.y0, self.y1 + 1):
                yield Point(x, y)

    def size(self, g: Optional[Geometry] = None) -> int:
        return self.width * self.height

    def __str__(self) -> str:
        return f"rect:{self.x0}:{self.x1}:{self.y0}:{self.y1}"


def rectangle(I, J) -> Rectangle:
    """Build R_{I,J} from two intervals given as ranges or (lo, hi) pairs."""
    return Rectangle(*_interval(I), *_interval(J))


def _interval(I) -> tuple[int, int]:
    if isinstance(I, range):
        if I.step != 1 or len(I) == 0:
            raise ValueError("interval must be a nonempty unit-step range")
        return I.start, I.stop - 1
    lo, hi = I
    return int(lo), int(hi)


@dataclass(frozen=True)
class Box:
    """Q_k(cx, cy) = {(cx+s, cy+t) : |s|, |t| <= k}."""

    k: int
    cx: int = 0
    cy: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("box radius must be >= 0")

    def contains(self, p: Point, g: Optional[Geometry] = None) -> bool:
        return abs(p.x - self.cx) <= self.k and abs(p.y - self.cy) <= self.k

    def bounds(self):
        return (self.cx - self.k, self.cx + self.k, self.cy - self.k, self.cy + self.k)

    def as_rectangle(self) -> Rectangle:
        return Rectangle(*self.bounds())

    def points(self, g: Optional[Geometry] = None) -> Iterator[Point]:
        return self.as_rectangle().points()

    def size(self, g: Optional[Geometry] = None) -> int:
        return (2 * self.k + 1) ** 2

    def __str__(self) -> str:
        if self.cx == 0 and self.cy == 0:
            return f"q:{self.k}"
        return f"q:{self.k}:{self.cx}:{self.cy}"


@dataclass(frozen=True)
class Band:
    """T_{k1,k2} = {k1+1, ..., k2} x (Z/wZ); cylinder only."""

    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 >= self.k2:
            raise ValueError("band requires k1 < k2")

    @property
    def width(self) -> int:
        return self.k2 - self.k1

    def contains(self, p: Point, g: Optional[Geometry] = None) -> bool:
        return self.k1 < p.x <= self.k2

    def bounds(self):
        return (self.k1 + 1, self.k2, None, None)

    def points(self, g: Optional[Geometry] = None) -> Iterator[Point]:
        w = _require_cylinder(g)
        for x in range(self.k1 + 1, self.k2 + 1):
            for y in range(1, w + 1):
                yield Point(x, y)

    def size(self, g: Optional[Geometry] = None) -> int:
        return self.width * _require_cylinder(g)

    def __str__(self) -> str:
        return f"band:{self.k1}:{self.k2}"


@dataclass(frozen=True)
class Annulus:
    """Q_outer(center) minus Q_inner(center)."""

    inner: int
    outer: int
    cx: int = 0
    cy: int = 0

    def __post_init__(self):
        if not 0 <= self.inner < self.outer:
            raise ValueError("annulus requires 0 <= inner < outer")

    def contains(self, p: Point, g: Optional[Geometry] = None) -> bool:
        r = max(abs(p.x - self.cx), abs(p.y - self.cy))
        return self.inner < r <= self.outer

    def bounds(self):
        return None

    def points(self, g: Optional[Geometry] = None) -> Iterator[Point]:
        outer = Box(self.outer, self.cx, self.cy)
        return (q for q in outer.points() if self.contains(q))

    def size(self, g: Optional[Geometry] = None) -> int:
        return (2 * self.outer + 1) ** 2 - (2 * self.inner + 1) ** 2

    def __str__(self) -> str:
        return f"annulus:{self.inner}:{self.outer}:{self.cx}:{self.cy}"


Region = Union[Rectangle, Box, Band, Annulus]


def _require_cylinder(g: Optional[Geometry]) -> int:
    if g is None or not g.is_cylinder:
        raise ValueError("band regions live on a cylinder")
    return g.circumference


def contains(region: Region, p: Point, g: Optional[Geometry] = None) -> bool:
    if g is not None:
        p = g.canon(p)
    return region.contains(p, g)


def parse_region(text: str) -> Region:
    """Parse ``q:k[:cx:cy]``, ``rect:x0:x1:y0:y1``, ``band:k1:k2`` or
    ``annulus:inner:outer[:cx:cy]``."""
    kind, *rest = text.split(":")
    try:
        vals = [int(v) for v in rest]
    except ValueError:
        raise ValueError(f"bad region {text!r}") from None
    if kind == "q" and len(vals) in (1, 3):
        return Box(*vals)
    if kind == "rect" and len(vals) == 4:
        return Rectangle(*vals)
    if kind == "band" and len(vals) == 2:
        return Band(*vals)
    if kind == "annulus" and len(vals) in (2, 4):
        return Annulus(*vals)
    raise ValueError(f"bad region {text!r}")


def bottom_edges(R: Rectangle) -> list[DirectedEdge]:
    """Edges ((x, y0-1), (x, y0)) for x in I, in ascending x."""
    return [DirectedEdge(Point(x, R.y0 - 1), Direction.N) for x in range(R.x0, R.x1 + 1)]


def top_edges(R: Rectangle) -> list[DirectedEdge]:
    """Edges ((x, y1), (x, y1+1)) for x in I, in ascending x."""
    return [DirectedEdge(Point(x, R.y1), Direction.N) for x in range(R.x0, R.x1 + 1)]
