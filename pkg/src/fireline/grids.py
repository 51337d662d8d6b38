"""Grid state containers and per-cell bookkeeping for the burn area.

The operating area is a square grid of 2 m x 2 m cells. The truth state
(what is actually burning, how much fuel remains) lives in WorldState; the
planners only ever see a BeliefState (believed burning map plus a per-cell
uncertainty score in [0, 1]).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

GRID_SIZE = 100
CELL_SIZE_M = 2.0

# Uncertainty grows with the believed-burning fraction of the Chebyshev
# ball of radius 5 around a cell (120 neighbors, self excluded).
UNCERTAINTY_RADIUS = 5
UNCERTAINTY_NEIGHBORHOOD = (2 * UNCERTAINTY_RADIUS + 1) ** 2 - 1


class CellIndex(NamedTuple):
    row: int
    col: int

    def in_bounds(self, size: int = GRID_SIZE) -> bool:
        return 0 <= self.row < size and 0 <= self.col < size


class ObservationBatch:
    """Cells observed this minute, in arrival order.

    Duplicate cells are allowed; the last entry for a cell wins.
    """

    def __init__(self, entries: Iterable[tuple[CellIndex, bool]] = ()):
        self.entries: list[tuple[CellIndex, bool]] = list(entries)

    def __len__(self) -> int:
        return len(self.entries)

    def cells(self) -> set[CellIndex]:
        return {c for c, _ in self.entries}

    def collapsed(self) -> dict[CellIndex, bool]:
        out: dict[CellIndex, bool] = {}
        for cell, val in self.entries:
            out[cell] = val
        return out


@dataclass
class WorldState:
    """Ground truth: burning mask, integer fuel, and the minute clock."""

    burning: np.ndarray
    fuel: np.ndarray
    clock_t: int = 0

    def copy(self) -> "WorldState":
        return WorldState(self.burning.copy(), self.fuel.copy(), self.clock_t)

    @property
    def shape(self) -> tuple[int, int]:
        return self.burning.shape


@dataclass
class BeliefState:
    believed_burning: np.ndarray
    uncertainty: np.ndarray

    @classmethod
    def empty(cls, shape: tuple[int, int] = (GRID_SIZE, GRID_SIZE)) -> "BeliefState":
        return cls(np.zeros(shape, dtype=bool), np.zeros(shape, dtype=np.float64))

    def copy(self) -> "BeliefState":
        return BeliefState(self.believed_burning.copy(), self.uncertainty.copy())


@dataclass(frozen=True)
class WindPhase:
    """A wind regime: direction in radians (0 = +col/east, pi/2 = -row/north),
    dimensionless strength >= 0, and the minute at which the next phase takes
    over (None for the final phase)."""

    direction: float
    strength: float
    switch_time: float | None = None


@dataclass
class Scenario:
    """Static inputs for one incident: terrain, values at risk, wind plan,
    ignition, and the water source used by the suppression aircraft."""

    initial_fuel: np.ndarray
    elevation: np.ndarray
    resources: np.ndarray
    wind: list[WindPhase]
    ignition_cells: list[CellIndex]
    origin: CellIndex
    water_source: tuple[float, float]  # (row_m, col_m); may lie outside the grid
    spread_preset: str = "moderate"
    name: str = "scenario"
    _kernel_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.initial_fuel.shape

    def wind_phase_at(self, minute: float) -> WindPhase:
        for phase in self.wind:
            if phase.switch_time is None or minute < phase.switch_time:
                return phase
        return self.wind[-1]

    def median_fuel(self) -> int:
        return int(np.median(self.initial_fuel))

    def initial_world(self) -> WorldState:
        burning = np.zeros(self.shape, dtype=bool)
        for cell in self.ignition_cells:
            burning[cell.row, cell.col] = True
        return WorldState(burning, self.initial_fuel.astype(np.int64).copy(), 0)

    def validate(self) -> None:
        """Strict checks applied to scenarios loaded from files."""
        n = GRID_SIZE
        for label, grid in (("fuel", self.initial_fuel),
                            ("elevation", self.elevation),
                            ("resources", self.resources)):
            if grid.shape != (n, n):
                raise ValueError(f"{label} grid must be {n}x{n}, got {grid.shape}")
        if np.any(self.initial_fuel < 0):
            raise ValueError("fuel values must be non-negative")
        if np.any(self.resources < 0):
            raise ValueError("resource values must be non-negative")
        if not self.wind:
            raise ValueError("at least one wind phase is required")
        for phase in self.wind:
            if phase.strength < 0:
                raise ValueError("wind strength must be non-negative")
        if not self.ignition_cells:
            raise ValueError("ignition cells must be non-empty")
        for cell in self.ignition_cells:
            if not cell.in_bounds(n):
                raise ValueError(f"ignition cell {cell} out of bounds")
        if not self.origin.in_bounds(n):
            raise ValueError(f"origin {self.origin} out of bounds")


def cell_center_m(cell: CellIndex | tuple[int, int]) -> tuple[float, float]:
    """Center of a grid cell in meters, (row_m, col_m)."""
    r, c = cell
    return ((r + 0.5) * CELL_SIZE_M, (c + 0.5) * CELL_SIZE_M)


def box_count(mask: np.ndarray, radius: int) -> np.ndarray:
    """Count of true cells in the inclusive Chebyshev box of `radius` around
    each cell, computed with an integral image (exact, no float drift)."""
    h, w = mask.shape
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(mask, axis=0), axis=1, out=integral[1:, 1:])
    rows = np.arange(h)
    cols = np.arange(w)
    r0 = np.clip(rows - radius, 0, h)
    r1 = np.clip(rows + radius + 1, 0, h)
    c0 = np.clip(cols - radius, 0, w)
    c1 = np.clip(cols + radius + 1, 0, w)
    return (integral[np.ix_(r1, c1)] - integral[np.ix_(r0, c1)]
            - integral[np.ix_(r1, c0)] + integral[np.ix_(r0, c0)])


def update_belief(belief: BeliefState, obs: ObservationBatch) -> BeliefState:
    """Write observed values into the belief; observed cells become certain.

    Last write wins within a batch. Unobserved cells are untouched.
    """
    out = belief.copy()
    for cell, value in obs.entries:
        out.believed_burning[cell.row, cell.col] = value
        out.uncertainty[cell.row, cell.col] = 0.0
    return out


def increment_uncertainty_grid(uncertainty: np.ndarray,
                               believed_burning: np.ndarray,
                               observed_mask: np.ndarray | None = None) -> np.ndarray:
    counts = box_count(believed_burning, UNCERTAINTY_RADIUS)
    counts = counts - believed_burning.astype(np.int64)
    growth = counts / float(UNCERTAINTY_NEIGHBORHOOD)
    out = np.minimum(1.0, uncertainty + growth)
    if observed_mask is not None:
        out[observed_mask] = 0.0
    return out


def increment_uncertainty(belief: BeliefState,
                          observed: set[CellIndex] | frozenset[CellIndex]) -> BeliefState:
    """Grow uncertainty near believed fire and reset it at observed cells.

    Growth for an unobserved cell is the believed-burning fraction of its
    Chebyshev radius-5 neighborhood; values clamp to [0, 1].
    """
    mask = np.zeros(belief.believed_burning.shape, dtype=bool)
    for cell in observed:
        mask[cell.row, cell.col] = True
    return BeliefState(
        belief.believed_burning.copy(),
        increment_uncertainty_grid(belief.uncertainty, belief.believed_burning, mask),
    )


def instantaneous_destruction(burning: np.ndarray, resources: np.ndarray) -> float:
    """Destruction rate D of a burning map: each burning cell costs 1 plus its
    resource value."""
    if not burning.any():
        return 0.0
    return float(burning.sum() + resources[burning].sum())


def ring_radius(burning: np.ndarray, origin: CellIndex | tuple[int, int]) -> float:
    """Mean Euclidean distance in meters from the origin cell to all burning
    cells; 0.0 when nothing burns."""
    rows, cols = np.nonzero(burning)
    if rows.size == 0:
        return 0.0
    orow, ocol = origin
    d = np.hypot(rows - orow, cols - ocol)
    return float(d.mean() * CELL_SIZE_M)
