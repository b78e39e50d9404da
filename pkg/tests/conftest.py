import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from slabperc.experiments import build_instance
from slabperc.geometry import PlanarRect
from slabperc.planner import desk_plan

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def small_rect(draw, lo=-6, hi=6, max_side=6):
    x0 = draw(st.integers(lo, hi))
    y0 = draw(st.integers(lo, hi))
    w = draw(st.integers(1, max_side))
    h = draw(st.integers(1, max_side))
    return PlanarRect.from_bounds(x0, x0 + w - 1, y0, y0 + h - 1)


@pytest.fixture(scope="session")
def desk_instance():
    return build_instance(desk_plan(seed=0), (600, 600))


ACCEPTANCE_LINES: list[str] = []


def criterion(number: int, ok: bool, detail: str) -> None:
    """Record one acceptance verdict; all verdicts are printed after the run."""
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
