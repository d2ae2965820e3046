from __future__ import annotations

import numpy as np
import pytest

from sldkit import cases
from sldkit.bus_system import build_ybus, extract_bus_system
from sldkit.powerflow import compute_branch_flows, newton_raphson

_ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.fspath.basename == "test_acceptance.py":
        _ACCEPTANCE_RESULTS.append((item.name, report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, passed in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}: {name}")


@pytest.fixture(scope="session")
def ieee14_net():
    return cases.ieee14()


@pytest.fixture(scope="session")
def ieee14_system(ieee14_net):
    return extract_bus_system(ieee14_net)


@pytest.fixture(scope="session")
def ieee14_ybus(ieee14_system):
    return build_ybus(ieee14_system.branches, ieee14_system.n,
                      ieee14_system.bus_shunt)


@pytest.fixture(scope="session")
def ieee14_nr(ieee14_system, ieee14_ybus):
    """Converged NR solution with branch flows attached."""
    solution, trace = newton_raphson(ieee14_ybus, ieee14_system.buses)
    assert solution.converged
    compute_branch_flows(solution, ieee14_system.branches)
    return solution, trace


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
