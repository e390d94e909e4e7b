import sys

import numpy as np
import pytest

from timax.graph import TopicGraph


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def path_graph():
    return TopicGraph.from_entries(3, 1, [(0, 1, 0, 0.5), (1, 2, 0, 0.5)])


@pytest.fixture
def star_graph():
    return TopicGraph.from_entries(4, 1, [(0, 1, 0, 0.9), (0, 2, 0, 0.9), (0, 3, 0, 0.9)])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        terminalreporter.write_line(module.RESULTS[number])
