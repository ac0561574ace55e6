import random

import pytest

from diamondkite import CircleSize, PointSize, close_down
from diamondkite.lattice import LatticeCoord, ReplacementKey, is_center, unit


def random_field(rng: random.Random, spread: float = 2.0):
    """Point or circle field whose refinement stays well inside a radius-8 patch."""
    cx, cy = rng.uniform(-spread, spread), rng.uniform(-spread, spread)
    if rng.random() < 0.5:
        return PointSize(cx, cy, scale=rng.uniform(0.4, 1.0), min=rng.uniform(0.06, 0.5))
    return CircleSize(cx, cy, r=rng.uniform(0.5, 3.0), scale=rng.uniform(0.4, 1.0), min=rng.uniform(0.08, 0.5))


def random_center(rng: random.Random, level: int, spread: int = 4) -> LatticeCoord:
    """A replacement center at ``level`` near the origin."""
    while True:
        p = LatticeCoord(rng.randint(-spread, spread), rng.randint(-spread, spread), 0)
        for _ in range(rng.randint(0, level)):
            p = p + unit(rng.randrange(6), rng.randint(0, level))
        if is_center(p, level):
            return p


def random_lower_set(rng: random.Random, max_keys: int = 100, max_level: int = 3):
    """Closure of a few random keys, kept below ``max_keys``."""
    keys: set = set()
    for _ in range(rng.randint(0, 6)):
        level = rng.randint(0, max_level)
        grown = keys | close_down([ReplacementKey(random_center(rng, level, 2), level)])
        if len(grown) <= max_keys:
            keys = grown
    return close_down(keys)


@pytest.fixture
def rng():
    return random.Random(12345)


_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion" in report.nodeid and report.when == "call":
        _ACCEPTANCE[report.nodeid] = report.outcome
    elif "test_acceptance.py::test_criterion" in report.nodeid and report.failed:
        _ACCEPTANCE[report.nodeid] = "failed"


def pytest_collection_modifyitems(items):
    for item in items:
        if "test_acceptance.py::test_criterion" in item.nodeid:
            doc = (item.function.__doc__ or "").strip().splitlines()
            _ACCEPTANCE.setdefault("titles", {})[item.nodeid] = doc[0] if doc else item.name


def pytest_terminal_summary(terminalreporter):
    titles = _ACCEPTANCE.get("titles", {})
    if not titles:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, title in titles.items():
        outcome = _ACCEPTANCE.get(nodeid, "not run")
        mark = "PASS" if outcome == "passed" else "FAIL" if outcome == "failed" else outcome.upper()
        terminalreporter.write_line(f"{mark:8} {title}")
