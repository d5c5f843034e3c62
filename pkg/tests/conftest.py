from __future__ import annotations

import numpy as np
import pytest

from l4station import ControlObjective, earth_moon, load_scenario, simulate

# criterion number -> (test name, passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


@pytest.fixture(scope="session")
def em():
    return earth_moon()


@pytest.fixture(scope="session")
def case1_cfg():
    return load_scenario("case1")


@pytest.fixture(scope="session")
def case2_cfg():
    return load_scenario("case2")


@pytest.fixture(scope="session")
def case1_obj(case1_cfg):
    return case1_cfg.objective


@pytest.fixture(scope="session")
def case2_obj(case2_cfg):
    return case2_cfg.objective


@pytest.fixture(scope="session")
def case1_result(case1_cfg):
    c = case1_cfg
    return simulate(c.system, c.objective, c.initial_state, c.integrator)


@pytest.fixture(scope="session")
def case2_result(case2_cfg):
    c = case2_cfg
    return simulate(c.system, c.objective, c.initial_state, c.integrator)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_obj():
    """Objective in O(1) units, handy for finite-difference checks."""
    return ControlObjective(d=1.0, L_d=[0.0, 0.0, 1.0], beta=0.5, a=2.0, u_max=10.0)


@pytest.fixture
def criterion(request):
    def report(number: int, passed: bool, detail: str):
        ACCEPTANCE[number] = (request.node.name, bool(passed), detail)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in range(1, 12):
        if number in ACCEPTANCE:
            _, passed, detail = ACCEPTANCE[number]
            terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {number:2d}: NOT RUN")
