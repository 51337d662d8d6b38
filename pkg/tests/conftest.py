import numpy as np
import pytest

from fireline import (
    CellIndex,
    PropagationParams,
    Scenario,
    WindPhase,
)
from fireline.grids import GRID_SIZE


def make_scenario(fuel_value=10, wind=None, elevation=None, resources=None,
                  ignition=((50, 50),), preset="moderate"):
    """Bare scenario on the standard grid; flat and windless by default."""
    n = GRID_SIZE
    fuel = np.full((n, n), fuel_value, dtype=np.int64)
    if elevation is None:
        elevation = np.zeros((n, n), dtype=np.float64)
    if resources is None:
        resources = np.zeros((n, n), dtype=np.float64)
    if wind is None:
        wind = [WindPhase(direction=0.0, strength=0.0)]
    return Scenario(
        initial_fuel=fuel,
        elevation=elevation,
        resources=resources,
        wind=wind,
        ignition_cells=[CellIndex(r, c) for r, c in ignition],
        origin=CellIndex(50, 50),
        water_source=(220.0, 100.0),
        spread_preset=preset,
        name="test-scenario",
    )


@pytest.fixture
def flat_scenario():
    return make_scenario()


@pytest.fixture
def params():
    return PropagationParams()
