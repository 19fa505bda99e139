import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import PLANE, cylinder_configs, plane_configs
from mirrorlab.lattice import Band, Box, Direction, Geometry, Point, edge, rectangle, reverse
from mirrorlab.mirrors import Configuration, MirrorState, sample
from mirrorlab.tracer import (
    Status, Trajectory, is_manhattan, manhattan_convention_cases, manhattan_edge_ok,
    predecessor, reflect, successor, trace,
)

E, N, W, S = Direction


def test_reflect_table():
    assert [reflect(d, MirrorState.NE) for d in Direction] == [N, E, S, W]
    assert [reflect(d, MirrorState.NW) for d in Direction] == [S, W, N, E]
    assert [reflect(d, MirrorState.EMPTY) for d in Direction] == list(Direction)


def test_convention_is_the_unique_manhattan_consistent_one():
    assert all(manhattan_convention_cases().values())
    swapped = manhattan_convention_cases(
        nw_map=lambda d: reflect(d, MirrorState.NE), ne_map=lambda d: reflect(d, MirrorState.NW)
    )
    assert not any(swapped.values())


def test_straight_ray_in_empty_box(empty_plane):
    t = trace(edge(0, 0, "E"), empty_plane, Box(3))
    assert t.status is Status.EXITED and t.length == 4
    assert t.end == Point(4, 0) and t.terminal_edge == edge(3, 0, "E")


def test_four_mirror_loop(loop_config):
    t = trace(edge(0, 0, "E"), loop_config, Box(2))
    assert t.closed and t.length == 4
    assert [tuple(e) for e in t.edges] == [
        ((0, 0), E), ((1, 0), N), ((1, 1), W), ((0, 1), S)]
    assert t == trace(edge(0, 0, "E"), loop_config, Box(2), debug=True)


def test_cap_exceeded(empty_plane):
    t = trace(edge(-5, 0, "E"), empty_plane, Box(5), cap=3)
    assert t.status is Status.CAP_EXCEEDED and t.length == 3


def test_start_outside_bound_is_allowed(empty_plane):
    t = trace(edge(-6, 2, "E"), empty_plane, Box(5))
    assert t.exited and t.length == 12 and t.start == Point(-6, 2)


def test_cylinder_vertical_orbit_closes():
    c = Configuration.empty(Geometry.cylinder(3), "lorentz", Band(0, 2))
    t = trace(edge(1, 3, "N"), c, Band(0, 2))
    assert t.closed and t.length == 3 and t.vertices() == {Point(1, y) for y in (1, 2, 3)}


def test_manhattan_full_density_loop():
    c = sample(Box(3), PLANE, "manhattan", 1.0, 0)
    t = trace(edge(0, 1, "E"), c, Box(3))
    assert t.closed and t.length == 4 and is_manhattan(t)
    assert not is_manhattan(t.reversed())


def test_summary_mode_keeps_terminal_edge(empty_plane):
    t = trace(edge(0, 0, "E"), empty_plane, Box(5), record_limit=2)
    assert not t.complete and t.terminal_edge == edge(5, 0, "E")
    with pytest.raises(ValueError):
        t.vertex_sequence()


def test_lines_round_trip(loop_config):
    t = trace(edge(0, 0, "E"), loop_config, Box(2))
    u = Trajectory.from_lines(t.to_lines(), PLANE, Status.CLOSED)
    assert u == t and t.to_lines().splitlines()[0] == "0 0 E"


@given(plane_configs(), st.integers(-4, 4), st.integers(-4, 4), st.sampled_from(list(Direction)))
def test_successor_predecessor_inverse(c, x, y, d):
    e = edge(x, y, d)
    assert predecessor(successor(e, c), c) == e
    assert successor(predecessor(e, c), c) == e


@given(plane_configs(), st.data())
def test_kernel_matches_debug_tracer(c, data):
    k = c.support.k
    e = edge(data.draw(st.integers(-k, k)), data.draw(st.integers(-k, k)),
             data.draw(st.sampled_from(list(Direction))))
    fast, slow = trace(e, c, c.support), trace(e, c, c.support, debug=True)
    assert fast == slow and fast.last == slow.last and fast.status is not Status.CAP_EXCEEDED


@given(cylinder_configs(), st.data())
def test_reverse_trace_retraces(c, data):
    g = c.geometry
    band = Band(c.support.k1 + 1, c.support.k2 - 1)
    x = data.draw(st.integers(band.k1 + 1, band.k2))
    e = edge(x, data.draw(st.integers(1, g.circumference)), data.draw(st.sampled_from(list(Direction))))
    t = trace(e, c, band, debug=True)
    back = trace(reverse(t.terminal_edge, g), c, band, cap=t.length)
    assert back.key() == t.reversed().key()


@given(cylinder_configs())
def test_manhattan_trajectories_keep_their_orientation(c):
    if c.model.value != "manhattan":
        return
    band = Band(0, c.support.k2 - 1)
    for y in (1, 2):
        t = trace(edge(0, y, "E"), c, band)
        assert is_manhattan(t) == manhattan_edge_ok(edge(0, y, "E"))


@given(plane_configs())
def test_closed_orbits_are_cycles(c):
    for q in list(c.support.points())[:10]:
        t = trace(edge(q.x, q.y, "N"), c, c.support)
        if t.closed:
            assert successor(t.terminal_edge, c) == t.initial_edge
            assert len(set(t.key())) == t.length


def test_reversed_path_rows():
    t = Trajectory.from_edges([edge(0, 0, "E"), edge(1, 0, "N")], PLANE)
    r = t.reversed()
    assert r.edges == [edge(1, 1, "S"), edge(1, 0, "W")]
    assert np.array_equal(r.reversed().path, t.path)
    assert t.x_extent() == (0, 1)
    assert rectangle((0, 1), (0, 1)).contains(t.end)
