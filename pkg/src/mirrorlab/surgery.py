"""Two-vertex surgery turning two strip-crossing trajectories into
bounce-back ones by rerouting them through a winding loop.

Lorentz: L1, L2 are distinct left-right trajectories; u_i is where L_i first
touches the loop.  The state at u1 is toggled (mirror removed, or an NE
mirror added), which sends the light from L1 onto the loop; the state at u2
is then chosen so that the light arriving along the loop leaves towards u3,
the vertex of L2 just before u2, and runs back along L2 to the left side.

Manhattan: L1 is a left-right and L2 a right-left Manhattan trajectory, u1
is the first touch of L1 and u2 the last touch of L2; mirror presence is
toggled at both (orientation forced by parity).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from .events import StripClassification, classify_strip, detect_wind, strip_counts, wind_bands
from .lattice import Band, Direction, Geometry, Point, step
from .mirrors import Configuration, MirrorState, ModelKind, dumps, manhattan_state, mutate, sample
from .rng import replicate_seed
from .tracer import Trajectory, is_manhattan, reflect, trace


class SurgeryError(RuntimeError):
    """A precondition of the surgery failed; carries the offending trace."""

    def __init__(self, msg: str, trajectory: Optional[Trajectory] = None):
        super().__init__(msg)
        self.trajectory = trajectory


class NoInstance(LookupError):
    pass


@dataclass
class SurgeryPlan:
    model: ModelKind
    L1: Trajectory
    L2: Trajectory
    loop: Trajectory
    u1: Point
    u2: Point
    new_states: dict
    band: Optional[Band] = None
    ell: Optional[int] = None
    u3: Optional[Point] = None
    old_states: dict = field(default_factory=dict)

    def inverse(self) -> "SurgeryPlan":
        return SurgeryPlan(self.model, self.L1, self.L2, self.loop, self.u1, self.u2,
                           dict(self.old_states), self.band, self.ell, self.u3,
                           dict(self.new_states))


def first_touch(t: Trajectory, loop: Trajectory) -> Optional[Point]:
    V = loop.vertices()
    return next((q for q in t.vertex_sequence() if q in V), None)


def last_touch(t: Trajectory, loop: Trajectory) -> Optional[Point]:
    V = loop.vertices()
    return next((q for q in reversed(t.vertex_sequence()) if q in V), None)


def _touch_index(t: Trajectory, q: Point) -> int:
    return t.vertex_sequence().index(q)


def _heading_to(a: Point, b: Point, c: Configuration) -> Direction:
    for d in Direction:
        if step(a, d, c.geometry) == b:
            return d
    raise ValueError(f"{a} and {b} are not adjacent")


def route_state(d_in: Direction, d_out: Direction) -> MirrorState:
    """The unique state sending heading d_in to heading d_out."""
    if d_out == d_in.reverse():
        raise SurgeryError(f"rerouting {d_in.name} -> {d_out.name} would need a U-turn")
    found = [s for s in MirrorState if reflect(d_in, s) == d_out]
    assert len(found) == 1, found
    return found[0]


def _check_loop(loop: Trajectory) -> None:
    if not loop.closed:
        raise SurgeryError("loop trajectory is not closed", loop)


def plan_surgery_lorentz(c, L1, L2, loop, band=None, ell=None, N=None) -> SurgeryPlan:
    _check_loop(loop)
    if L1 == L2:
        raise SurgeryError("L1 and L2 must be distinct")
    u1, u2 = first_touch(L1, loop), first_touch(L2, loop)
    if u1 is None or u2 is None:
        raise SurgeryError("a left-right trajectory misses the N-good loop", L1 if u1 is None else L2)
    seq2 = L2.vertex_sequence()
    u3 = seq2[_touch_index(L2, u2) - 1]
    s1 = MirrorState.EMPTY if c.state(u1) != MirrorState.EMPTY else MirrorState.NE
    tilde = mutate(c, u1, s1)
    N = N if N is not None else _strip_length(L1)
    retrace = trace(L1.initial_edge, tilde, Band(0, N))
    d_in = None
    loop_edges = set(loop.key()) | set(loop.reversed().key())
    on_loop = False
    for e in retrace.edges:
        if e.src == u1:
            on_loop = True
        if on_loop and (e.src.x, e.src.y, int(e.heading)) not in loop_edges:
            raise SurgeryError("diverted light left the loop before reaching u2", retrace)
        if step(e.src, e.heading, c.geometry) == u2:
            d_in = e.heading
            break
    if d_in is None or not on_loop:
        raise SurgeryError("diverted light never reached u2 along the loop", retrace)
    s2 = route_state(d_in, _heading_to(u2, u3, c))
    return SurgeryPlan(
        ModelKind.LORENTZ, L1, L2, loop, u1, u2, {u1: s1, u2: s2}, band, ell, u3,
        {u1: c.state(u1), u2: c.state(u2)},
    )


def _strip_length(t: Trajectory) -> int:
    return t.terminal_edge.src.x  # left-right trajectories end on ((N, y), (N+1, y))


def plan_surgery_manhattan(c, L1, L2, loop, band=None, ell=None) -> SurgeryPlan:
    _check_loop(loop)
    if not is_manhattan(loop):
        loop = loop.reversed()
    if not (is_manhattan(L1) and is_manhattan(L2)):
        raise SurgeryError("L1 and L2 must be Manhattan trajectories")
    u1, u2 = first_touch(L1, loop), last_touch(L2, loop)
    if u1 is None or u2 is None:
        raise SurgeryError("a crossing trajectory misses the N-good loop", L1 if u1 is None else L2)
    if u1 == u2:
        raise SurgeryError("u1 and u2 coincide")
    new = {}
    for u in (u1, u2):
        new[u] = manhattan_state(*u) if c.state(u) == MirrorState.EMPTY else MirrorState.EMPTY
    return SurgeryPlan(ModelKind.MANHATTAN, L1, L2, loop, u1, u2, new, band, ell,
                       old_states={u1: c.state(u1), u2: c.state(u2)})


def apply(c: Configuration, plan: SurgeryPlan) -> Configuration:
    out = c
    for u, s in plan.new_states.items():
        out = mutate(out, u, s)
    return out


def find_inputs(c: Configuration, N: int, width: int, spacing: int,
                classification: Optional[StripClassification] = None):
    """Canonical (L1, L2, loop, band, ell) or None.

    L1, L2 are the crossing trajectories with the smallest entry edges and
    the loop comes from the smallest band index with a winding event.
    """
    n = c.geometry.circumference // 2
    cl = classification or classify_strip(c, N)
    if c.model is ModelKind.LORENTZ:
        if len(cl.left_right) < 2:
            return None
        L1, L2 = cl.left_right[:2]
    else:
        man = cl.manhattan()
        if not man["left_right"] or not man["right_left"]:
            return None
        L1, L2 = man["left_right"][0], man["right_left"][0]
    for ell, band in wind_bands(n, N, width, spacing):
        out = detect_wind(c, n, N, band)
        if out.holds:
            return L1, L2, out.witness, band, ell
    return None


def plan_surgery(c: Configuration, N: int, width: int, spacing: int) -> SurgeryPlan:
    found = find_inputs(c, N, width, spacing)
    if found is None:
        raise NoInstance("configuration lacks the crossing or winding preconditions")
    L1, L2, loop, band, ell = found
    if c.model is ModelKind.LORENTZ:
        return plan_surgery_lorentz(c, L1, L2, loop, band, ell, N)
    return plan_surgery_manhattan(c, L1, L2, loop, band, ell)


def _may_qualify(c: Configuration, N: int) -> bool:
    counts = strip_counts(c, N)
    if c.model is ModelKind.LORENTZ:
        return counts["left_right"] >= 2
    return counts["manhattan_left_right"] >= 1 and counts["manhattan_right_left"] >= 1


def instances(model, n: int, N: int, p, root_seed: int, width: int, spacing: int,
              max_tries: int = 10**6, start: int = 0) -> Iterator[tuple[int, Configuration, SurgeryPlan]]:
    """Rejection-sample the band {1..N} on the 2n-cylinder.

    Replicate r uses seed derive(root_seed, r); yields (r, c, plan) for every
    replicate meeting the crossing and winding preconditions.
    """
    g = Geometry.cylinder(2 * n)
    support = Band(0, N)
    for r in range(start, start + max_tries):
        c = sample(support, g, model, p, replicate_seed(root_seed, r))
        if not _may_qualify(c, N):
            continue
        try:
            yield r, c, plan_surgery(c, N, width, spacing)
        except NoInstance:
            continue


def weight_bound(model, p) -> float:
    """C_p = (largest / smallest single-site probability) ** 2."""
    sites = (1 - p, p / 2) if ModelKind(model) is ModelKind.LORENTZ else (1 - p, p)
    return (max(sites) / min(sites)) ** 2


@dataclass
class SurgeryReport:
    checks: dict
    details: dict
    before: str = ""
    after: str = ""

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, ok in self.checks.items() if not ok]

    def dump(self) -> str:
        lines = [f"surgery verification {'passed' if self.passed else 'FAILED'}"]
        lines += [f"  {k}: {'ok' if v else 'FAIL'}" for k, v in self.checks.items()]
        lines += [f"  {k} = {v}" for k, v in self.details.items()]
        if not self.passed:
            lines += ["--- before", self.before, "--- after", self.after]
        return "\n".join(lines)


def verify_surgery(c: Configuration, c2: Configuration, plan: SurgeryPlan, N: int) -> SurgeryReport:
    """Check the four postconditions of the surgery.

    (a) exactly the two planned vertices changed; (b) exactly two new
    left-left trajectories, inverse to each other; (c) Lorentz: two fewer
    left-right trajectories; Manhattan: one fewer left-right and one fewer
    right-left Manhattan trajectory and one new right-right one; (d) both
    vertices lie on the loop and inside its band.
    """
    diff = c.diff(c2)
    cl1, cl2 = classify_strip(c, N), classify_strip(c2, N)
    checks, details = {}, {"u1": tuple(plan.u1), "u2": tuple(plan.u2), "diff": sorted(diff)}
    checks["a_two_sites"] = diff == {plan.u1, plan.u2} and len(diff) == 2

    old = {t.key() for t in cl1.left_left}
    new = [t for t in cl2.left_left if t.key() not in old]
    details["left_left"] = (len(cl1.left_left), len(cl2.left_left))
    checks["b_new_left_left_pair"] = (
        len(cl2.left_left) == len(cl1.left_left) + 2
        and len(new) == 2
        and new[0].reversed() == new[1]
    )

    if c.model is ModelKind.LORENTZ:
        details["left_right"] = (len(cl1.left_right), len(cl2.left_right))
        checks["c_crossings_removed"] = len(cl2.left_right) == len(cl1.left_right) - 2
    else:
        m1, m2 = cl1.manhattan_counts(), cl2.manhattan_counts()
        details["manhattan_counts"] = (m1, m2)
        checks["c_crossings_removed"] = (
            m2["left_right"] == m1["left_right"] - 1
            and m2["right_left"] == m1["right_left"] - 1
            and m2["right_right"] == m1["right_right"] + 1
        )

    V = plan.loop.vertices()
    in_band = plan.band is None or all(plan.band.contains(u) for u in (plan.u1, plan.u2))
    checks["d_sites_on_loop_band"] = in_band and plan.u1 in V and plan.u2 in V
    details["weight_ratio"] = float(c.weight() / c2.weight()) if c2.weight() else float("inf")
    report = SurgeryReport(checks, details)
    if not report.passed:
        report.before, report.after = dumps(c), dumps(c2)
    return report
