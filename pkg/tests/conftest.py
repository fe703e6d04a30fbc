"""Shared graphs for the test suite."""

from itertools import permutations

import pytest

from builders import build_grassmannian, build_projective
from gkm_graph import GkmGraph


def build_flag3() -> GkmGraph:
    """Full flags in C^3: vertices are permutations, edges w -- w*(i j).

    Weight x_{w(j)} - x_{w(i)}; the graph is valid and 2-independent but every
    star is dependent (x3 - x1 = (x2 - x1) + (x3 - x2)).
    """
    vertices = ["".join(map(str, w)) for w in permutations((1, 2, 3))]
    edges = []
    for w in permutations((1, 2, 3)):
        for i in range(3):
            for j in range(i + 1, 3):
                swapped = list(w)
                swapped[i], swapped[j] = swapped[j], swapped[i]
                source, target = "".join(map(str, w)), "".join(map(str, swapped))
                if source < target:
                    weight = [0, 0, 0]
                    weight[w[j] - 1] += 1
                    weight[w[i] - 1] -= 1
                    edges.append((source, target, weight))
    return GkmGraph.from_edge_list(3, vertices, edges)


def build_line() -> GkmGraph:
    """Two fixed points joined by one edge of weight x1 (rank 1)."""
    return GkmGraph.from_edge_list(1, ["a", "b"], [("a", "b", (1,))])


@pytest.fixture
def cp2() -> GkmGraph:
    return build_projective(2)


@pytest.fixture
def j42() -> GkmGraph:
    return build_grassmannian(4, 2)


@pytest.fixture
def flag3() -> GkmGraph:
    return build_flag3()


@pytest.fixture
def line() -> GkmGraph:
    return build_line()
