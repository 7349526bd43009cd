import pytest

from modhail.network import generate_graph, load_graph


@pytest.fixture(scope="session")
def campus_graph():
    return generate_graph(33, 106, 7)


@pytest.fixture(scope="session")
def small_graph():
    return generate_graph(12, 30, 3)


def cycle_doc():
    return {
        "nodes": [{"id": 0, "x_m": 0.0, "y_m": 0.0}, {"id": 1, "x_m": 100.0, "y_m": 0.0}],
        "links": [
            {"origin": 0, "dest": 1, "speed_class": "path"},
            {"origin": 1, "dest": 0, "speed_class": "path"},
        ],
    }


@pytest.fixture
def two_cycle():
    return load_graph(cycle_doc())


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in REPORT:
            terminalreporter.write_line(line)
