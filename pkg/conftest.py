import numpy as np
import pytest

from SceneGenerator import Obstacle, SceneParams, generate


def scene_params(alpha1: float, v_py: float, seed: int, **kwargs) -> SceneParams:
    """Parameters of a scene whose horizon sits at row v_py."""
    return SceneParams(alpha0=-alpha1 * v_py, alpha1=alpha1, texture_seed=seed, **kwargs)


@pytest.fixture(scope='session')
def planar_scene():
    return generate(SceneParams(alpha0=-20.0, alpha1=0.25, texture_seed=3))


@pytest.fixture(scope='session')
def obstacle_scene():
    # 310x150 box standing on row 350, about 10% of the frame
    base = -20.0 + 0.25 * 350
    return generate(SceneParams(alpha0=-20.0, alpha1=0.25, texture_seed=5,
                                obstacles=(Obstacle(u0=600, v0=200, width=310, height=150, disparity=base),)))


@pytest.fixture(scope='session')
def small_scene():
    return generate(SceneParams(width=160, height=96, alpha0=-6.0, alpha1=0.2, texture_seed=11))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
