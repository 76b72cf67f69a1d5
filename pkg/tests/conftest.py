import pytest

from fracladder.config import RunConfig
from fracladder.grid import build_grid
from fracladder.ladder import run_ladder
from fracladder.operator import assemble_stiffness

ORIGIN_CFG = {}
INFINITY_CFG = {
    "nonlinearity": {"family": "infinity", "alpha": 2.0, "beta": 1.5, "a": 0.5},
    "construction": {"name": "infinity_power", "linear": 0.1},
    "ladder": {"search_range": [10.0, 40.0], "min_ratio": 1.1},
}


@pytest.fixture(scope="session")
def grid257():
    return build_grid(1.0, 257)


@pytest.fixture(scope="session")
def stiff257(grid257):
    return assemble_stiffness(grid257, 0.4)


@pytest.fixture(scope="session")
def origin_cfg():
    return RunConfig.from_dict(ORIGIN_CFG)


@pytest.fixture(scope="session")
def infinity_cfg():
    return RunConfig.from_dict(INFINITY_CFG)


@pytest.fixture(scope="session")
def origin_result(origin_cfg, grid257, stiff257):
    return run_ladder(origin_cfg.composite(), grid257, 0.4, origin_cfg.harness_options(), stiffness=stiff257)


@pytest.fixture(scope="session")
def infinity_result(infinity_cfg, grid257, stiff257):
    return run_ladder(infinity_cfg.composite(), grid257, 0.4, infinity_cfg.harness_options(), stiffness=stiff257)
