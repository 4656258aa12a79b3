import numpy as np
import pytest

from geodd import PlantSystem, span_of


@pytest.fixture
def mismatched_plant():
    # A K satisfying the coupling inclusion exists although S is not inside
    # V. The disturbance column equals B's first column; flipping its sign
    # leaves the hand-checkable K below with no solution at all.
    return PlantSystem(
        A=[[0, 0, 0], [0, 0, 0], [0, -1, 1]],
        B=[[-1, 0], [1, 0], [0, 0]],
        H=[[-1], [1], [0]],
        C=[[1, 1, 0], [0, 1, 0]],
        D_y=np.zeros((2, 2)),
        G_y=[[-1], [0]],
        E=[[1, 0, 0]],
        D_z=[[0, 1]],
        G_z=[[1]],
    )


@pytest.fixture
def mismatched_plant_pair():
    V = span_of(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]))
    S = span_of(np.array([[0.0], [2.0], [7.0]]))
    return V, S


@pytest.fixture
def singular_family_plant():
    # Every K satisfying the coupling inclusion makes I + K D_y singular.
    return PlantSystem(
        A=[[0, 0, 0], [0, 0, 0], [-1, 0, 0]],
        B=[[0, 0], [-1, 0], [0, -1]],
        H=[[1, 0], [0, 1], [1, 0]],
        C=[[-1, 0, 0], [0, 1, 1]],
        D_y=[[1, 0], [0, -1]],
        G_y=[[0, 0], [-1, -1]],
        E=[[0, 0, 1]],
        D_z=[[-1, 0]],
        G_z=[[0, 0]],
    )


@pytest.fixture
def scalar_channel_plant():
    # Scalar-channel plant whose decoupling compensators are not exhausted
    # by the canonical construction.
    return PlantSystem(
        A=np.eye(2),
        B=[[-1], [0]],
        H=[[1], [0]],
        C=[[1, 0]],
        D_y=[[1]],
        G_y=[[1]],
        E=[[0, -1]],
        D_z=[[0]],
        G_z=[[0]],
    )
