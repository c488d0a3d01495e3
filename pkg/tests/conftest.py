import pytest

from admin.config import SolverConfig
from shared.instance import build_instance


@pytest.fixture(autouse=True)
def fresh_config():
    """Chaque test part de la configuration par défaut."""
    config = SolverConfig.reset()
    yield config
    SolverConfig.reset()


@pytest.fixture
def line_instance():
    # deux clients sur une demi-droite, d = 0.6 chacun : LB = 5.8, OPT = 7.8
    return build_instance([0.6, 0.6], a=1.0, b=1.0, points=[[0, 0], [1, 0], [2, 0]])


@pytest.fixture
def triangle_instance():
    # côtés 3, 4, 5 : tau = 12
    return build_instance([0.2, 0.5], a=1.0, b=2.0, points=[[0, 0], [3, 0], [0, 4]])
