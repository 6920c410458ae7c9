"""Shared fixtures: the worked 3-chain example, built-in graphs and seeded generators"""

from pathlib import Path

import numpy as np
import pytest

from src.core import builtin_graph, graph_hamiltonians, simultaneous_diag

DATA_DIR = Path(__file__).resolve().parent.parent / 'data'

WORKED_RHO = np.array([
    [84, -22, 11, -51, -15, -8, -26, 4],
    [-22, 51, -5, -7, 23, -13, 17, 40],
    [11, -5, 51, 25, -16, -3, 9, 28],
    [-51, -7, 25, 70, -19, 17, 18, -26],
    [-15, 23, -16, -19, 92, 32, 23, 24],
    [-8, -13, -3, 17, 32, 62, 2, -36],
    [-26, 17, 9, 18, 23, 2, 94, 10],
    [4, 40, 28, -26, 24, -36, 10, 109],
], dtype=float)

WORKED_RHO_STAR = np.array([
    [20.5417, -12.5, -20.5, -12.4746, -5.5, 3.34685, -5.48884, -3.34006],
    [-12.5, 20.5417, 12.4746, 20.5, 3.34685, -5.5, 3.34006, 5.48884],
    [-20.5, 12.4746, 20.5417, 12.5, 5.48884, -3.34006, 5.5, 3.34685],
    [-12.4746, 20.5, 12.5, 20.5417, 3.34006, -5.48884, 3.34685, 5.5],
    [-5.5, 3.34685, 5.48884, 3.34006, 20.5417, -12.5, 20.5, 12.4746],
    [3.34685, -5.5, -3.34006, -5.48884, -12.5, 20.5417, -12.4746, -20.5],
    [-5.48884, 3.34006, 5.5, 3.34685, 20.5, -12.4746, 20.5417, 12.5],
    [-3.34006, 5.48884, 3.34685, 5.5, 12.4746, -20.5, 12.5, 20.5417],
])


@pytest.fixture
def worked_rho():
    return WORKED_RHO.copy()


@pytest.fixture
def worked_rho_star():
    return WORKED_RHO_STAR.copy()


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def chain3():
    return builtin_graph('chain3')


@pytest.fixture
def fig1():
    return builtin_graph('fig1')


@pytest.fixture
def chain3_model(chain3):
    return simultaneous_diag(graph_hamiltonians(chain3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, n):
    """Full-rank trace-one symmetric matrix"""
    w = rng.standard_normal((n, n))
    rho = w @ w.T + 0.1 * np.eye(n)
    return rho / np.trace(rho)
