import pytest

from combinatorial_cstar.cstar_process import CStarProcess
from combinatorial_cstar.input_handler import parse_input
from combinatorial_cstar.inverse_hull import generate_hull
from combinatorial_cstar.tight_groupoid import build_tight_groupoid
from combinatorial_cstar.utils import fixture_path


def _load(name, **kwargs):
    return parse_input(fixture_path(name), **kwargs)


@pytest.fixture
def spec_a():
    """Graph v <-e- w."""
    return _load("fixture_a")


@pytest.fixture
def fixture_a(spec_a):
    return spec_a.category


@pytest.fixture
def fixture_b():
    """The group Z/2 as a one-object category."""
    return _load("fixture_b").category


@pytest.fixture
def fixture_c():
    """A single commuting square, as a 2-graph."""
    return _load("fixture_c").category


@pytest.fixture
def fixture_d():
    """Two commuting squares on the same corners; not singly aligned."""
    return _load("fixture_d").category


@pytest.fixture
def idempotent_monoid():
    return _load("idempotent_monoid").category


@pytest.fixture
def loop():
    """A single loop, truncated at depth 3."""
    return _load("loop").category


@pytest.fixture
def hull_a(fixture_a):
    return generate_hull(fixture_a)


@pytest.fixture
def hull_b(fixture_b):
    return generate_hull(fixture_b)


@pytest.fixture
def hull_c(fixture_c):
    return generate_hull(fixture_c)


@pytest.fixture
def groupoid_a(hull_a):
    return build_tight_groupoid(hull_a)


@pytest.fixture
def groupoid_b(hull_b):
    return build_tight_groupoid(hull_b)


@pytest.fixture
def groupoid_c(hull_c):
    return build_tight_groupoid(hull_c)


@pytest.fixture
def cstar_process():
    """A CStarProcess with the default configuration."""
    return CStarProcess(config_filename="")
