from fractions import Fraction

import pytest

from mirrorlab.events import detect_crossing
from mirrorlab.lattice import Geometry, rectangle
from mirrorlab.mirrors import RegionTooLarge
from mirrorlab.oracle import (
    battery, exact_concatenation_check, exact_pair_table, exact_parity_check, exact_probability,
    pinned_event, reflection_check, union_check,
)

PLANE = Geometry.plane()
F = Fraction


def crossing(m, n):
    return lambda c: detect_crossing(c, (1, m), (1, n)).holds


@pytest.mark.parametrize("p", [F(1, 3), F(1, 2), F(4, 5)])
def test_single_vertex_crossing_is_one_minus_p(p):
    for model in ("lorentz", "manhattan"):
        r = exact_probability(rectangle((1, 1), (1, 1)), PLANE, model, p, crossing(1, 1))
        assert r.probability == 1 - p and r.exact


def test_frozen_crossing_values():
    R21 = rectangle((1, 2), (1, 1))
    assert exact_probability(R21, PLANE, "lorentz", F(1, 2), crossing(2, 1)).probability == F(7, 8)
    assert exact_probability(R21, PLANE, "lorentz", F(1, 3), crossing(2, 1)).probability == F(17, 18)
    col2 = rectangle((2, 2), (1, 1))
    r = exact_probability(col2, PLANE, "manhattan", F(1, 3), lambda c: detect_crossing(c, (2, 2), (1, 1)).holds)
    assert r.probability == F(2, 3)


def test_float_p_uses_fsum_and_reports_error():
    r = exact_probability(rectangle((1, 2), (1, 1)), PLANE, "lorentz", 0.5, crossing(2, 1))
    assert r.probability == pytest.approx(0.875, abs=1e-15)
    assert not r.exact and 0 < r.error_bound < 1e-12


def test_pair_table_frozen():
    t = exact_pair_table(2, 1, "lorentz", F(1, 2))
    assert t.matrix == [[F(1, 2), F(1, 16)], [F(1, 16), F(1, 2)]]
    assert t.symmetric and t.union == F(7, 8)
    R = rectangle((1, 2), (1, 1))
    assert exact_probability(R, PLANE, "lorentz", F(1, 2), pinned_event(R, 1, 2)).probability == F(1, 16)


@pytest.mark.parametrize("m,n,model,p,union", [
    (2, 1, "lorentz", F(1, 3), F(17, 18)),
    (2, 1, "lorentz", F(1, 2), F(7, 8)),
    (2, 2, "manhattan", F(1, 2), F(7, 16)),
])
def test_union_equals_crossing(m, n, model, p, union):
    rep = union_check(m, n, model, p)
    assert rep.passed and rep.details["union"] == str(union) and rep.details["symmetric"]


@pytest.mark.parametrize("w,N,model,hist", [
    (2, 3, "lorentz", {0: 386, 2: 343}),
    (3, 2, "lorentz", {1: 504, 3: 225}),
    (2, 4, "manhattan", {0: 175, 2: 81}),
])
def test_parity_frozen_histograms(w, N, model, hist):
    rep = exact_parity_check(w, N, model)
    assert rep.passed and rep.details["left_right_histogram"] == hist
    assert rep.checked == sum(hist.values())


@pytest.mark.parametrize("m,n,model,hits", [
    (2, 1, "lorentz", 20), (3, 1, "lorentz", 281), (2, 2, "manhattan", 32),
])
def test_concatenation_frozen(m, n, model, hits):
    rep = exact_concatenation_check(m, n, model)
    assert rep.passed and rep.details["configs_in_intersection"] == hits


def test_reflection_check():
    assert reflection_check(3, 2, "lorentz", F(1, 3)).passed
    assert reflection_check(2, 2, "manhattan", F(1, 2)).passed


def test_battery_filters():
    everything = battery()
    assert everything and all(r.passed for r in everything)
    parity = battery("parity", max_cells=6)
    assert [r.name for r in parity] == ["parity_lorentz_w2_N3", "parity_lorentz_w3_N2",
                                        "parity_lorentz_w1_N4"]
    assert battery("concatenation", max_cells=3) == []
    with pytest.raises(ValueError):
        battery("nonsense")
    d = everything[0].as_dict()
    assert d["passed"] and d["violations"] == 0


def test_oversize_region_is_refused():
    with pytest.raises(RegionTooLarge):
        exact_probability(rectangle((1, 7), (1, 3)), PLANE, "lorentz", F(1, 2), crossing(7, 3))
