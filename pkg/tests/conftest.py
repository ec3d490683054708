import pathlib

import numpy as np
import pytest

from vem2d.benchmarks import PENTAGON, STEEL_LIKE, pentagon_problem
from vem2d.element import ElementGeometry, TraceScaled, element_stiffness

DATA = pathlib.Path(__file__).parent / "data"


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def pentagon():
    return PENTAGON.copy()


@pytest.fixture
def pentagon_geom():
    return ElementGeometry.from_vertices(PENTAGON)


@pytest.fixture
def steel():
    return STEEL_LIKE


@pytest.fixture
def pentagon_k(pentagon_geom, steel):
    return element_stiffness(pentagon_geom, steel, TraceScaled(0.05))


@pytest.fixture
def pentagon_case():
    return pentagon_problem()


@pytest.fixture
def unit_square():
    return np.array([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
