"""Mirror configurations.

A configuration stores one byte per vertex over the bounding box of its
support (0 = empty, 1 = NW, 2 = NE); every vertex outside the box reads
empty.  Configurations are immutable: ``mutate`` returns a fresh copy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Iterator, Optional, Union

import numpy as np

from .lattice import Annulus, Band, Box, Geometry, Point, Rectangle, Region, parse_region
from .rng import vertex_uniforms

SAMPLER_VERSION = "splitmix-vertex-v1"
ENUMERATION_LIMIT = {"lorentz": 20, "manhattan": 32}

Prob = Union[float, Fraction]


class MirrorState(IntEnum):
    EMPTY = 0
    NW = 1
    NE = 2


class ModelKind(str, Enum):
    LORENTZ = "lorentz"
    MANHATTAN = "manhattan"

    def __str__(self) -> str:
        return self.value


class RegionTooLarge(ValueError):
    pass


def manhattan_state(x: int, y: int) -> MirrorState:
    """Orientation forced on a Manhattan mirror at (x, y)."""
    return MirrorState.NW if (x - y) % 2 == 0 else MirrorState.NE


def _check_model(model, g: Geometry) -> ModelKind:
    model = ModelKind(model)
    if model is ModelKind.MANHATTAN and g.is_cylinder and g.circumference % 2:
        raise ValueError(
            f"Manhattan model needs an even circumference, got {g.circumference}"
        )
    return model


def _check_p(p) -> Prob:
    if isinstance(p, int):
        p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p


def support_box(region: Region, g: Geometry) -> tuple[int, int, int, int]:
    """(x0, x1, y0, y1) of the storage box for a support region."""
    if isinstance(region, Band):
        if not g.is_cylinder:
            raise ValueError("band support requires cylinder geometry")
        return region.k1 + 1, region.k2, 1, g.circumference
    if isinstance(region, Annulus):
        return Box(region.outer, region.cx, region.cy).bounds()
    x0, x1, y0, y1 = region.bounds()
    if g.is_cylinder and (y0 < 1 or y1 > g.circumference):
        raise ValueError("cylinder supports must use canonical rows 1..w")
    return x0, x1, y0, y1


def _grid(region: Region, g: Geometry):
    x0, x1, y0, y1 = support_box(region, g)
    xs = np.arange(x0, x1 + 1, dtype=np.int64)[:, None]
    ys = np.arange(y0, y1 + 1, dtype=np.int64)[None, :]
    mask = None
    if isinstance(region, Annulus):
        r = np.maximum(np.abs(xs - region.cx), np.abs(ys - region.cy))
        mask = r > region.inner
    return x0, y0, xs, ys, mask


@dataclass(frozen=True, eq=False)
class Configuration:
    geometry: Geometry
    model: ModelKind
    support: Region
    states: np.ndarray = field(repr=False)
    x0: int
    y0: int
    p: Prob = 0.5
    seed: Optional[int] = None
    sampler: Optional[str] = None

    def __post_init__(self):
        self.states.setflags(write=False)

    # construction -------------------------------------------------------

    @classmethod
    def empty(cls, g: Geometry, model, support: Region, p: Prob = 0.5) -> "Configuration":
        model = _check_model(model, g)
        x0, x1, y0, y1 = support_box(support, g)
        states = np.zeros((x1 - x0 + 1, y1 - y0 + 1), dtype=np.uint8)
        return cls(g, model, support, states, x0, y0, _check_p(p))

    @classmethod
    def from_mirrors(
        cls, g: Geometry, model, support: Region, mirrors: dict, p: Prob = 0.5
    ) -> "Configuration":
        """Handcrafted configuration from a {(x, y): state} mapping."""
        c = cls.empty(g, model, support, p)
        states = np.array(c.states)
        for (x, y), s in mirrors.items():
            q = g.canon(Point(x, y))
            s = MirrorState[s] if isinstance(s, str) else MirrorState(s)
            c._check_site(q, s)
            states[q.x - c.x0, q.y - c.y0] = s
        return c._replace_states(states)

    def _replace_states(self, states, **kw) -> "Configuration":
        kw.setdefault("seed", None)
        kw.setdefault("sampler", None)
        return Configuration(
            self.geometry, self.model, self.support, states, self.x0, self.y0, self.p, **kw
        )

    def _check_site(self, q: Point, s: MirrorState) -> None:
        if not self.support.contains(q, self.geometry):
            raise ValueError(f"vertex {tuple(q)} lies outside the support {self.support}")
        if (
            self.model is ModelKind.MANHATTAN
            and s != MirrorState.EMPTY
            and s != manhattan_state(*q)
        ):
            raise ValueError(
                f"Manhattan parity violation: {s.name} at {tuple(q)} "
                f"(x-y {'even' if (q.x - q.y) % 2 == 0 else 'odd'})"
            )

    # access -------------------------------------------------------------

    @property
    def handcrafted(self) -> bool:
        return self.seed is None

    def state(self, p) -> MirrorState:
        q = self.geometry.canon(Point(*p))
        i, j = q.x - self.x0, q.y - self.y0
        if 0 <= i < self.states.shape[0] and 0 <= j < self.states.shape[1]:
            return MirrorState(int(self.states[i, j]))
        return MirrorState.EMPTY

    def mirrors(self) -> dict[Point, MirrorState]:
        ii, jj = np.nonzero(self.states)
        return {
            Point(int(i) + self.x0, int(j) + self.y0): MirrorState(int(self.states[i, j]))
            for i, j in zip(ii, jj)
        }

    def mirror_count(self) -> int:
        return int(np.count_nonzero(self.states))

    def diff(self, other: "Configuration") -> set[Point]:
        a, b = self.mirrors(), other.mirrors()
        return {q for q in a.keys() | b.keys() if a.get(q) != b.get(q)}

    def site_weights(self) -> tuple[Prob, ...]:
        p = self.p
        if self.model is ModelKind.LORENTZ:
            return (1 - p, p / 2, p / 2)
        return (1 - p, p)

    def weight(self) -> Prob:
        """P_p of this configuration restricted to its support."""
        w_empty, w_mirror = self.site_weights()[:2]
        k = self.mirror_count()
        n = self.support.size(self.geometry)
        if isinstance(self.p, Fraction):
            return w_empty ** (n - k) * w_mirror**k
        return math.prod([w_empty] * (n - k) + [w_mirror] * k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.model == other.model
            and self.support == other.support
            and self.p == other.p
            and self.mirrors() == other.mirrors()
        )

    def __hash__(self) -> int:
        return hash((self.geometry, self.model, self.support, frozenset(self.mirrors().items())))


# sampling -------------------------------------------------------------------


def _states_from_uniforms(u: np.ndarray, xs, ys, model: ModelKind, p) -> np.ndarray:
    p = float(p)
    if model is ModelKind.LORENTZ:
        return np.where(u < p / 2, 1, np.where(u < p, 2, 0)).astype(np.uint8)
    forced = np.where((xs - ys) % 2 == 0, 1, 2).astype(np.uint8)
    return np.where(u < p, forced, 0).astype(np.uint8)


def sample(region: Region, g: Geometry, model, p: Prob, seed: int) -> Configuration:
    """Draw a configuration on ``region`` under P_p.

    Vertex (x, y) is decided by the uniform ``u = derive(seed, x, y)``:
    Lorentz gives NW for u < p/2, NE for p/2 <= u < p, empty otherwise;
    Manhattan gives the parity-forced mirror for u < p.
    """
    model = _check_model(model, g)
    p = _check_p(p)
    x0, y0, xs, ys, mask = _grid(region, g)
    u = vertex_uniforms(np.uint64(seed), xs, ys)
    states = _states_from_uniforms(u, xs, ys, model, p)
    if mask is not None:
        states = np.where(mask, states, 0).astype(np.uint8)
    return Configuration(g, model, region, states, x0, y0, p, int(seed), SAMPLER_VERSION)


def sample_batch(region: Region, g: Geometry, model, p: Prob, seeds) -> np.ndarray:
    """States for many seeds at once, shape (len(seeds), nx, ny).

    Slice ``k`` equals ``sample(region, g, model, p, seeds[k]).states``.
    """
    model = _check_model(model, g)
    p = _check_p(p)
    _, _, xs, ys, mask = _grid(region, g)
    seeds = np.asarray(seeds, dtype=np.uint64)[:, None, None]
    u = vertex_uniforms(seeds, xs[None], ys[None])
    states = _states_from_uniforms(u, xs[None], ys[None], model, p)
    if mask is not None:
        states = np.where(mask[None], states, 0).astype(np.uint8)
    return states


def from_states(
    region: Region, g: Geometry, model, p: Prob, states: np.ndarray, seed: Optional[int] = None
) -> Configuration:
    x0, _, y0, _ = support_box(region, g)
    return Configuration(
        g, ModelKind(model), region, np.ascontiguousarray(states), x0, y0, p,
        None if seed is None else int(seed), SAMPLER_VERSION if seed is not None else None,
    )


# enumeration ----------------------------------------------------------------


def enumeration_size(region: Region, g: Geometry, model) -> int:
    base = 3 if ModelKind(model) is ModelKind.LORENTZ else 2
    return base ** region.size(g)


def enumerate_configurations(
    region: Region, g: Geometry, model, p: Prob
) -> Iterator[tuple[Configuration, Prob]]:
    """Every configuration on ``region`` with its probability.

    Vertices are taken row-major (x outer, y inner); the state of the last
    vertex varies fastest.
    """
    model = _check_model(model, g)
    p = _check_p(p)
    points = list(region.points(g))
    limit = ENUMERATION_LIMIT[model.value]
    if len(points) > limit:
        raise RegionTooLarge(
            f"{len(points)} vertices exceeds the {model.value} enumeration bound of {limit}"
        )
    base = Configuration.empty(g, model, region, p)
    weights = base.site_weights()
    options = []
    for q in points:
        if model is ModelKind.LORENTZ:
            options.append(((0, weights[0]), (1, weights[1]), (2, weights[2])))
        else:
            options.append(((0, weights[0]), (int(manhattan_state(*q)), weights[1])))
    idx = [(q.x - base.x0, q.y - base.y0) for q in points]
    rows = np.array([i for i, _ in idx], dtype=np.intp)
    cols = np.array([j for _, j in idx], dtype=np.intp)
    exact = isinstance(p, Fraction)
    for combo in itertools.product(*options):
        states = np.zeros_like(base.states)
        states[rows, cols] = [s for s, _ in combo]
        ws = [w for _, w in combo]
        w = math.prod(ws) if not exact else _fprod(ws)
        yield base._replace_states(states), w


def _fprod(ws):
    out = Fraction(1)
    for w in ws:
        out *= w
    return out


# mutation and the vertical reflection ---------------------------------------


def mutate(c: Configuration, v, s) -> Configuration:
    """Copy of ``c`` with state ``s`` at vertex ``v``."""
    q = c.geometry.canon(Point(*v))
    s = MirrorState[s] if isinstance(s, str) else MirrorState(s)
    c._check_site(q, s)
    states = np.array(c.states)
    states[q.x - c.x0, q.y - c.y0] = s
    return c._replace_states(states)


_SWAP = np.array([0, 2, 1], dtype=np.uint8)


def reflect_vertical(c: Configuration) -> Configuration:
    """Mirror image of a rectangle configuration across its horizontal midline.

    The mirror at (x, y) moves to (x, y0 + y1 - y) with NW and NE exchanged.
    For the Manhattan model this preserves the parity rule only when
    y0 + y1 is odd (rows 1..n with n even).
    """
    R = c.support
    if not isinstance(R, Rectangle) or c.geometry.is_cylinder:
        raise ValueError("reflect_vertical needs a rectangle support on the plane")
    if c.model is ModelKind.MANHATTAN and (R.y0 + R.y1) % 2 == 0:
        raise ValueError(
            f"Manhattan reflection needs an even number of rows, got {R.height}"
        )
    states = _SWAP[c.states[:, ::-1]]
    return c._replace_states(np.ascontiguousarray(states))


# text format ----------------------------------------------------------------


def _format_p(p: Prob) -> str:
    if isinstance(p, Fraction):
        return str(p) if p.denominator != 1 else f"{p.numerator}/1"
    return repr(float(p))


def _parse_p(text: str) -> Prob:
    return Fraction(text) if "/" in text else float(text)


def dumps(c: Configuration) -> str:
    """Header line then one ``x y NW|NE`` line per mirror (row-major order)."""
    seed = "handcrafted" if c.seed is None else str(c.seed)
    lines = [
        f"model={c.model.value} geometry={c.geometry} p={_format_p(c.p)} seed={seed} "
        f"support={c.support}"
    ]
    for q, s in sorted(c.mirrors().items()):
        lines.append(f"{q.x} {q.y} {s.name}")
    return "\n".join(lines) + "\n"


class ConfigFormatError(ValueError):
    pass


def loads(text: str) -> Configuration:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise ConfigFormatError("empty configuration file")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[0].split())
        model = ModelKind(fields["model"])
        g = Geometry.parse(fields["geometry"])
        p = _parse_p(fields["p"])
        seed = None if fields["seed"] == "handcrafted" else int(fields["seed"])
        mirrors = {}
        for ln in lines[1:]:
            x, y, s = ln.split()
            mirrors[(int(x), int(y))] = MirrorState[s]
    except (KeyError, ValueError) as exc:
        raise ConfigFormatError(f"malformed configuration: {exc}") from None
    if "support" in fields:
        support = parse_region(fields["support"])
    else:
        support = _default_support(mirrors, g)
    c = Configuration.from_mirrors(g, model, support, mirrors, p)
    if seed is not None:
        c = c._replace_states(np.array(c.states), seed=seed, sampler=SAMPLER_VERSION)
    return c


def _default_support(mirrors: dict, g: Geometry) -> Region:
    if not mirrors:
        return Band(-1, 0) if g.is_cylinder else Rectangle(0, 0, 0, 0)
    xs = [x for x, _ in mirrors]
    ys = [y for _, y in mirrors]
    if g.is_cylinder:
        return Band(min(xs) - 1, max(xs))
    return Rectangle(min(xs), max(xs), min(ys), max(ys))


def save(c: Configuration, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(c))


def load(path) -> Configuration:
    with open(path) as fh:
        return loads(fh.read())
