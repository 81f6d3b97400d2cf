"""
Shared fixtures: tiny graphs with closed-form answers
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from src.ensembles.deterministic import complete_graph, cycle_graph, path_graph, star_graph  # noqa: E402
from src.models.graph import build_graph  # noqa: E402


@pytest.fixture
def triangle():
    return complete_graph(3)


@pytest.fixture
def path4():
    return path_graph(4)


@pytest.fixture
def cycle6():
    return cycle_graph(6)


@pytest.fixture
def star5():
    return star_graph(5)


@pytest.fixture
def weighted_path():
    # 0 -(2)- 1 -(0.5)- 2: series resistance 0.5 + 2
    return build_graph([(0, 1, 2.0), (1, 2, 0.5)])


@pytest.fixture
def single_vertex():
    return build_graph([], vertex_count=1)
