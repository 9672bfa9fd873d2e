"""Shared fixtures and the per-criterion acceptance summary."""

from collections import OrderedDict

import pytest

CRITERIA = OrderedDict([
    (1, "closed forms vs quadrature (Z, I_m, Var, Dirichlet)"),
    (2, "optimality identity and 1/(4 beta) floor"),
    (3, "inequality suite on gallery x grid"),
    (4, "equality witnesses (Gross LSI, Maurey, zero pair)"),
    (5, "sampler moments and quartiles"),
    (6, "tail envelopes and branch continuity"),
    (7, "Hardy constant bounds and toy value"),
    (8, "inf-convolution closed form and slope"),
    (9, "isoperimetric grids and Minkowski content"),
    (10, "CLI byte-identical determinism"),
])

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num): acceptance criterion covered by the test")


def pytest_collection_modifyitems(config, items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    state = _outcomes.setdefault(crit, {"passed": 0, "failed": 0, "skipped": 0})
    if report.failed:
        state["failed"] += 1
    elif report.when == "call":
        state["passed" if report.passed else "skipped"] += 1
    elif report.skipped:
        state["skipped"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for num, desc in CRITERIA.items():
        state = _outcomes.get(num)
        if state is None:
            line = "NOT RUN"
        elif state["failed"] == 0 and state["passed"] > 0:
            line = "PASS"
        else:
            line = "FAIL"
        counts = "" if state is None else f" ({state['passed']} passed, {state['failed']} failed)"
        terminalreporter.write_line(f"criterion {num:2d} {line:7s} {desc}{counts}")


@pytest.fixture(scope="session")
def grid():
    """(n, beta) pairs with n in {1, 2, 3} and beta in {n, n+1, 2n, 10n}."""
    out = []
    for n in (1, 2, 3):
        for beta in sorted({n, n + 1, 2 * n, 10 * n}):
            out.append((n, float(beta)))
    return out
