"""Shared fixtures for the medexc test suite."""

import numpy as np
import pytest

from medexc.data.dataset import Dataset
from medexc.models.dgp import DiscreteDGP
from medexc.models.simulation import GM1Params, GM2Params
from medexc.simulation.gm1 import gm1_generate
from medexc.simulation.gm2 import gm2_generate


def make_tiny_dgp(y_scale: float = 1.0) -> DiscreteDGP:
    """T=1, I=1, A ~ Bern(0.5), M | A ~ Bern(0.3 + 0.4 A), E[Y | A, M] = A + M."""
    m1 = np.array([0.3, 0.7])
    m_cpt = np.zeros((1, 2, 2, 1, 2, 2, 2))
    m_cpt[..., 1] = m1
    m_cpt[..., 0] = 1 - m1
    a_axis = np.arange(2.0)[None, None, :, None]
    m_axis = np.arange(2.0)[None, None, None, :]
    y_mean = np.broadcast_to(y_scale * (a_axis + m_axis), (1, 2, 2, 2))
    return DiscreteDGP.from_arrays(
        x_support=[0.0],
        m_support=[0.0, 1.0],
        x_cpt=np.ones((1, 2, 2, 1)),
        i_cpt=np.ones((1, 2, 2, 1)),
        a_cpt=np.full((1, 2, 2, 1), 0.5),
        m_cpt=m_cpt,
        y_mean=y_mean,
    )


@pytest.fixture
def tiny_dgp():
    """The four-cell DGP with known mediation functionals."""
    return make_tiny_dgp()


@pytest.fixture
def tiny_dgp_factory():
    """Build the tiny DGP with outcome means scaled by a constant."""
    return make_tiny_dgp


@pytest.fixture
def gm1_small():
    """A small GM-1 sample."""
    return gm1_generate(400, seed=11)


@pytest.fixture
def gm1_short_params():
    """GM-1 with three decision points."""
    return GM1Params(T=3)


@pytest.fixture
def gm2_short_params():
    """GM-2 with six decision points for fast tests."""
    return GM2Params(T=6)


@pytest.fixture
def gm2_small(gm2_short_params):
    """A GM-2 sample with eligibility varying over time."""
    return gm2_generate(600, seed=5, params=gm2_short_params)


@pytest.fixture
def toy_dataset():
    """Three participants, three decision points, one ineligible point."""
    return Dataset(
        x=np.array([[[0.1], [0.2], [0.3]], [[1.0], [1.1], [1.2]], [[-0.5], [0.0], [0.5]]]),
        i=np.array([[1, 1, 0], [1, 1, 1], [1, 0, 1]]),
        a=np.array([[1, 0, 0], [0, 1, 1], [1, 0, 0]]),
        m=np.array([[0.5, 1.5, 2.5], [0.0, 1.0, 0.0], [2.0, 2.0, 2.0]]),
        y=np.array([1.0, 2.0, 3.0]),
        ids=("a", "b", "c"),
    )


@pytest.fixture
def write_csv(tmp_path):
    """Write text to a CSV file under tmp_path and return its path."""

    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
