import pytest

from cotrain.world.collect import collect_demos
from cotrain.world.presets import get_preset


@pytest.fixture(scope="session")
def cup_world():
    return get_preset("real_cup_pnp")


@pytest.fixture(scope="session")
def door_world():
    return get_preset("real_close_door")


@pytest.fixture(scope="session")
def cup_demos(cup_world):
    return collect_demos(cup_world, 4, seed=7)


@pytest.fixture(scope="session")
def door_demos(door_world):
    return collect_demos(door_world, 3, seed=7)
