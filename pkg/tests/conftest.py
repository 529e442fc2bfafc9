"""Shared fixtures: jit warmup outside timed regions, acceptance summary."""

import re

import numpy as np
import pytest

_CRITERION_PATTERN = re.compile(r"test_criterion_(\d+)")

_CRITERION_LABELS = {
    1: "threshold command",
    2: "exact identities",
    3: "level-set law",
    4: "concentrating family",
    5: "excess asymptotics",
    6: "variational search",
    7: "coordinate identity and determinism",
}

_outcomes: dict[int, list[str]] = {}


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Force one compilation of every kernel entry point up front so the
    timed acceptance sections measure steady-state work."""
    from mtlab import _kernels

    knots = np.array([0.0, 1.0, 2.0])
    values = np.array([0.0, 0.4, 0.7])
    shape = np.array([1.0, 0.1, 1.0, -0.5, np.pi, np.log(0.5), 2.0])
    heights = np.array([0.1, 0.2])
    weights = np.array([0.5, 0.25])
    _kernels.integrand_values(heights, 2, 1, 1.0, 4.0 * np.pi)
    _kernels.integrand_slopes(heights, 2, 1, 1.0, 4.0 * np.pi)
    _kernels.weighted_values(heights, weights, 2, 1, 1.0, 4.0 * np.pi)
    _kernels.weighted_values_and_slopes(heights, weights, 2, 1, 1.0, 4.0 * np.pi)
    _kernels.integrate_piecewise(knots, values, 2, 1, 1.0, 4.0 * np.pi, 1e-9)
    _kernels.integrate_bubble(0.0, 2.0, shape, 2, 1, 1.0, 4.0 * np.pi, 1e-9)
    yield


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    match = _CRITERION_PATTERN.search(report.nodeid)
    if match:
        _outcomes.setdefault(int(match.group(1)), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        status = "PASS" if all(r == "passed" for r in results) else "FAIL"
        label = _CRITERION_LABELS.get(number, "")
        terminalreporter.write_line(f"criterion {number} ({label}): {status}")
