# tests/conftest.py
import numpy as np
import pytest

from src.blocks.dist import excess_of, make_poisson, make_powerlaw
from src.blocks.netgraph import ContactGraph
from src.models.internal import EpidemicParams
from src.utils.config import DOLPHIN_PATH


@pytest.fixture
def table_one():
    """Reference parameter set: alpha=0.4, beta=0.15, gamma=0.1, gamma1=0.1, eta=0.5."""
    return EpidemicParams()


@pytest.fixture(scope="session")
def poisson25():
    # the tail above 100 is below 1e-25, so kmax=100 keeps tests fast
    return make_poisson(25.0, kmax=100)


@pytest.fixture(scope="session")
def poisson25_excess(poisson25):
    return excess_of(poisson25)


@pytest.fixture(scope="session")
def poisson25_full():
    return make_poisson(25.0, kmax=1000)


@pytest.fixture(scope="session")
def powerlaw():
    return make_powerlaw(-2.5, kmin=1, kmax=1000)


@pytest.fixture
def triangle_with_tail():
    """Triangle 0-1-2 plus the pendant edge 2-3."""
    return ContactGraph.from_edges(4, np.array([[0, 1], [0, 2], [1, 2], [2, 3]]))


@pytest.fixture
def dolphin_path():
    if not DOLPHIN_PATH.exists():
        pytest.skip(f"dolphin edge list not found at {DOLPHIN_PATH}")
    return DOLPHIN_PATH


def _random_graph(n: int, p: float, rng: np.random.Generator) -> ContactGraph:
    """Erdos-Renyi G(n, p) drawn pair by pair."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return ContactGraph.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))


@pytest.fixture
def random_graph():
    return _random_graph
