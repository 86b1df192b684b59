import numpy as np
import pytest

from cryptobn.graph import Dag
from cryptobn.simulate import network_from_tables


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_node_net():
    """A -> B with P(A) = [0.5, 0.5] and P(B | A) rows [0.9, 0.1], [0.2, 0.8]."""
    dag = Dag.from_edges("AB", [("A", "B")])
    return network_from_tables(dag, {"A": [[0.5, 0.5]], "B": [[0.9, 0.1], [0.2, 0.8]]})


@pytest.fixture
def collider_net():
    dag = Dag.from_edges("ABC", [("A", "C"), ("B", "C")])
    return network_from_tables(
        dag,
        {
            "A": [[0.5, 0.5]],
            "B": [[0.5, 0.5]],
            "C": [[0.9, 0.1], [0.2, 0.8], [0.25, 0.75], [0.05, 0.95]],
        },
    )


# One PASS/FAIL line per acceptance criterion, taken from real test outcomes.
_criteria: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _criteria[number] = (title, status, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status, seconds = _criteria[number]
        terminalreporter.write_line(f"{status} criterion {number}: {title} ({seconds:.2f} s)")
