import pytest

from posopt import GameDefinition


@pytest.fixture
def two_sites():
    """Two well-separated positions with masses 0.3 and 0.7."""
    return GameDefinition.finite(["a", "b"], ["a", "b"], [0.3, 0.7], [[0, 1], [1, 0]])


@pytest.fixture
def path3():
    return GameDefinition.graph(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1)], [0.2, 0.3, 0.5])
