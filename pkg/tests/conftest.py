import pytest
from hypothesis import HealthCheck, settings, strategies as st

from mirrorlab.lattice import Band, Box, Geometry
from mirrorlab.mirrors import Configuration, MirrorState, sample

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

PLANE = Geometry.plane()

seeds = st.integers(min_value=0, max_value=2**63 - 1)
probs = st.sampled_from([0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0])
models = st.sampled_from(["lorentz", "manhattan"])


@st.composite
def plane_configs(draw, max_k=4):
    k = draw(st.integers(1, max_k))
    return sample(Box(k), PLANE, draw(models), draw(probs), draw(seeds))


@st.composite
def cylinder_configs(draw, max_n=3, max_len=12):
    n = draw(st.integers(1, max_n))
    N = draw(st.integers(1, max_len))
    return sample(Band(-1, N + 1), Geometry.cylinder(2 * n), draw(models), draw(probs), draw(seeds))


@pytest.fixture
def loop_config():
    """Four mirrors around a unit square: (0,0)E closes after 4 edges."""
    return Configuration.from_mirrors(
        PLANE, "lorentz", Box(2),
        {(0, 0): MirrorState.NW, (1, 0): MirrorState.NE,
         (1, 1): MirrorState.NW, (0, 1): MirrorState.NE},
    )


@pytest.fixture
def empty_plane():
    return Configuration.empty(PLANE, "lorentz", Box(5))


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
