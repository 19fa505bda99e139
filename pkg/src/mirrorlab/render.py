"""Deterministic SVG 1.1 scenes of configurations and trajectories.

Lattice x runs to the right and y upwards.  A cylinder is unrolled with the
axial x direction horizontal; rows 1..w are drawn and the seam between row w
and row 1 is dashed at the top and bottom of the picture.  Polylines of
trajectories that cross the seam are broken there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .lattice import Direction, head
from .mirrors import Configuration, MirrorState, support_box

PALETTE = ("#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#17becf", "#8c564b")


@dataclass(frozen=True)
class Style:
    cell: float = 24.0
    margin: float = 18.0
    tick: float = 0.36  # half-length of a mirror tick, in lattice units
    nw_color: str = "#e377c2"
    ne_color: str = "#1f77b4"
    grid_color: str = "#dddddd"
    line_width: float = 2.0
    grid: bool = True
    palette: tuple = PALETTE


def _num(v: float) -> str:
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


class _Frame:
    def __init__(self, xlo, xhi, ylo, yhi, style: Style):
        self.xlo, self.xhi, self.ylo, self.yhi, self.s = xlo, xhi, ylo, yhi, style
        self.width = (xhi - xlo + 1) * style.cell + 2 * style.margin
        self.height = (yhi - ylo + 1) * style.cell + 2 * style.margin

    def px(self, x: float, y: float) -> tuple[str, str]:
        s = self.s
        return (_num(s.margin + (x - self.xlo + 0.5) * s.cell),
                _num(s.margin + (self.yhi - y + 0.5) * s.cell))

    def line(self, x1, y1, x2, y2, attrs: str) -> str:
        a, b = self.px(x1, y1)
        c, d = self.px(x2, y2)
        return f'<line x1="{a}" y1="{b}" x2="{c}" y2="{d}" {attrs}/>'


def _pieces(t, g) -> list[list[tuple[float, float]]]:
    """Vertex positions of a trajectory, split wherever it crosses the seam."""
    edges = t.edges
    if not edges:
        return []
    w = g.circumference if g.is_cylinder else None
    pieces, cur = [], [tuple(edges[0].src)]
    for e in edges:
        q = head(e, g)
        up = e.heading == Direction.N
        wraps = (up and q.y < e.src.y) or (e.heading == Direction.S and q.y > e.src.y)
        if w is not None and wraps:
            cur.append((e.src.x, e.src.y + (0.5 if up else -0.5)))
            pieces.append(cur)
            cur = [(q.x, q.y - (0.5 if up else -0.5))]
        cur.append(tuple(q))
    pieces.append(cur)
    return pieces


def view_box(c: Configuration, trajectories: Sequence = (), region=None):
    """Lattice bounds (xlo, xhi, ylo, yhi) covering the support and all trajectories."""
    g = c.geometry
    if region is not None:
        xlo, xhi, ylo, yhi = support_box(region, g)
    else:
        xlo, xhi, ylo, yhi = support_box(c.support, g)
        pts = [q for t in trajectories for piece in _pieces(t, g) for q in piece]
        if pts:
            xlo = min(xlo, min(int(q[0]) for q in pts))
            xhi = max(xhi, max(int(q[0]) for q in pts))
            if not g.is_cylinder:
                ylo = min(ylo, min(int(q[1]) for q in pts))
                yhi = max(yhi, max(int(q[1]) for q in pts))
    if g.is_cylinder:
        ylo, yhi = 1, g.circumference
    if xhi < xlo or yhi < ylo:
        raise ValueError("nothing to draw: the region is empty")
    return xlo, xhi, ylo, yhi


def render(c: Configuration, trajectories: Sequence = (), style: Optional[Style] = None,
           region=None, title: Optional[str] = None) -> str:
    """SVG document for ``c`` with the given trajectories drawn on top."""
    style = style or Style()
    g = c.geometry
    f = _Frame(*view_box(c, trajectories, region), style)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_num(f.width)}" '
        f'height="{_num(f.height)}" viewBox="0 0 {_num(f.width)} {_num(f.height)}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out += [
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="8" refY="5" markerWidth="5" '
        'markerHeight="5" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="context-stroke"/></marker>',
        "</defs>",
        "<style>"
        f".grid{{stroke:{style.grid_color};stroke-width:1}}"
        f".mirror{{stroke-width:3;stroke-linecap:round}}"
        f".nw{{stroke:{style.nw_color}}}.ne{{stroke:{style.ne_color}}}"
        f".seam{{stroke:#555555;stroke-width:1;stroke-dasharray:4,3}}"
        f".traj{{fill:none;stroke-width:{_num(style.line_width)};stroke-linejoin:round}}"
        "</style>",
        f'<rect x="0" y="0" width="{_num(f.width)}" height="{_num(f.height)}" fill="white"/>',
    ]
    if style.grid:
        out.append('<g class="grid">')
        for x in range(f.xlo, f.xhi + 1):
            out.append(f.line(x, f.ylo - 0.5, x, f.yhi + 0.5, 'class="grid"'))
        for y in range(f.ylo, f.yhi + 1):
            out.append(f.line(f.xlo - 0.5, y, f.xhi + 0.5, y, 'class="grid"'))
        out.append("</g>")
    if g.is_cylinder:
        for y in (f.ylo - 0.5, f.yhi + 0.5):
            out.append(f.line(f.xlo - 0.5, y, f.xhi + 0.5, y, 'class="seam"'))

    k = style.tick
    out.append('<g class="mirrors">')
    for q, s in sorted(c.mirrors().items()):
        if not (f.xlo <= q.x <= f.xhi and f.ylo <= q.y <= f.yhi):
            continue
        if s == MirrorState.NE:
            out.append(f.line(q.x - k, q.y - k, q.x + k, q.y + k, 'class="mirror ne"'))
        else:
            out.append(f.line(q.x - k, q.y + k, q.x + k, q.y - k, 'class="mirror nw"'))
    out.append("</g>")

    out.append('<g class="trajectories">')
    for i, t in enumerate(trajectories):
        color = style.palette[i % len(style.palette)]
        pieces = _pieces(t, g)
        for j, piece in enumerate(pieces):
            pts = " ".join(",".join(f.px(x, y)) for x, y in piece)
            marks = ""
            if j == 0:
                marks += ' marker-start="url(#arrow)"'
            if j == len(pieces) - 1:
                marks += ' marker-end="url(#arrow)"'
            out.append(f'<polyline class="traj" stroke="{color}" points="{pts}"{marks}/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_svg(path, document: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(document)


def count_elements(document: str) -> dict[str, int]:
    """Numbers of mirror ticks (by class) and trajectory polylines."""
    return {
        "ne": document.count('class="mirror ne"'),
        "nw": document.count('class="mirror nw"'),
        "polylines": document.count("<polyline"),
    }
