import numpy as np
import pytest

from encperf.analysis import METHODS, min_l2_gain
from encperf.fixtures import batch_reactor_plant, hinf_controller

TABLE = {
    "nominal": 1.8030,
    "bootstrap": 2.0332,
    "reset_robust": 1.9508,
    "reset_nominal": 1.8869,
    "fir_nominal": 1.8819,
}


@pytest.fixture(scope="session")
def plant():
    return batch_reactor_plant()


@pytest.fixture(scope="session")
def controller():
    return hinf_controller()


@pytest.fixture(scope="session")
def certified(plant, controller):
    """Benchmark results for every method at T=10, computed once per session."""
    return {m: min_l2_gain(m, plant, controller, period=10, sector_gamma=0.223) for m in METHODS}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
