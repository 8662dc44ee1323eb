import logging

import numpy as np
import pytest

from dershare.network import build_from_edges

# the xi clamp warning is expected on aggressive constants; keep test output clean
logging.getLogger("dershare.drs").setLevel(logging.ERROR)


@pytest.fixture
def path_graph():
    return build_from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def star_graph():
    return build_from_edges(3, [(0, 1), (0, 2)])


@pytest.fixture
def six_node_graph():
    from dershare.presets import SIX_NODE_EDGES

    return build_from_edges(6, SIX_NODE_EDGES)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
