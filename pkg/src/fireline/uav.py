"""Two-drone surveillance layer: airspace kinematics, ranging footprints,
and the surveillance reward.

The airspace is a 10 x 10 x 7 lattice of 20 m cells above the burn grid.
Higher altitude widens the ranging footprint (side 10*z burn cells) at the
cost of sparser sampling, since at most 100 cells are read per drone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .drops import AxisOfAdvance
from .grids import CellIndex, ObservationBatch, cell_center_m

AIR_XY = 10
AIR_Z_MIN = 1
AIR_Z_MAX = 7
AIR_CELL_M = 20.0
RANGING_CAP = 100


class Move(Enum):
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"
    ASCEND = "ascend"
    DESCEND = "descend"
    HOVER = "hover"


# (dx, dy, dz); x is the east column block, y the south row block.
_MOVE_DELTAS = {
    Move.UP: (0, -1, 0),
    Move.DOWN: (0, 1, 0),
    Move.LEFT: (-1, 0, 0),
    Move.RIGHT: (1, 0, 0),
    Move.ASCEND: (0, 0, 1),
    Move.DESCEND: (0, 0, -1),
    Move.HOVER: (0, 0, 0),
}

ALL_MOVES: tuple[Move, ...] = tuple(Move)


class DronePos(NamedTuple):
    x: int
    y: int
    z: int


class SurveillanceState(NamedTuple):
    drone1: DronePos
    drone2: DronePos


class SurveillanceAction(NamedTuple):
    move1: Move
    move2: Move


JOINT_ACTIONS: tuple[SurveillanceAction, ...] = tuple(
    SurveillanceAction(m1, m2) for m1 in ALL_MOVES for m2 in ALL_MOVES
)


def move_target(pos: DronePos, move: Move) -> DronePos:
    dx, dy, dz = _MOVE_DELTAS[move]
    return DronePos(pos.x + dx, pos.y + dy, pos.z + dz)


def in_airspace(pos: DronePos) -> bool:
    return (0 <= pos.x < AIR_XY and 0 <= pos.y < AIR_XY
            and AIR_Z_MIN <= pos.z <= AIR_Z_MAX)


def legal_actions(state: SurveillanceState) -> list[SurveillanceAction]:
    """Joint moves keeping both drones in the airspace and never co-located.

    Swapping cells mid-air is allowed; sharing a target cell is not. Order is
    stable (row-major over the move enum) for deterministic search.
    """
    out = []
    for action in JOINT_ACTIONS:
        t1 = move_target(state.drone1, action.move1)
        t2 = move_target(state.drone2, action.move2)
        if in_airspace(t1) and in_airspace(t2) and t1 != t2:
            out.append(action)
    return out


def apply_action(state: SurveillanceState, action: SurveillanceAction) -> SurveillanceState:
    t1 = move_target(state.drone1, action.move1)
    t2 = move_target(state.drone2, action.move2)
    if not (in_airspace(t1) and in_airspace(t2)):
        raise ValueError(f"action {action} leaves the airspace from {state}")
    if t1 == t2:
        raise ValueError(f"action {action} puts both drones in {t1}")
    return SurveillanceState(t1, t2)


def drone_position_m(pos: DronePos) -> tuple[float, float, float]:
    """(row_m, col_m, alt_m) of an airspace cell center."""
    return ((pos.y + 0.5) * AIR_CELL_M, (pos.x + 0.5) * AIR_CELL_M,
            pos.z * AIR_CELL_M)


def footprint_bounds(pos: DronePos, size: int) -> tuple[int, int, int, int]:
    """Clipped (r0, r1, c0, c1) of the ranging square under a drone.

    The square has side 10*z burn cells centered under the drone; at z=1 it
    is exactly the 10x10 block below the airspace cell.
    """
    half = 5 * pos.z
    r_center = pos.y * 10 + 5
    c_center = pos.x * 10 + 5
    r0 = max(0, r_center - half)
    r1 = min(size, r_center + half)
    c0 = max(0, c_center - half)
    c1 = min(size, c_center + half)
    return r0, r1, c0, c1


def ranging_cells(pos: DronePos, size: int, rng: np.random.Generator,
                  cap: int = RANGING_CAP) -> np.ndarray:
    """Flat burn-grid indices sampled by one drone this minute."""
    r0, r1, c0, c1 = footprint_bounds(pos, size)
    rows = r1 - r0
    cols = c1 - c0
    count = rows * cols
    if count <= 0:
        return np.empty(0, dtype=np.int64)
    local = np.arange(count, dtype=np.int64)
    if count > cap:
        local = rng.choice(count, size=cap, replace=False)
    rr = r0 + local // cols
    cc = c0 + local % cols
    return rr * size + cc


def ranging(state: SurveillanceState, burning: np.ndarray,
            rng: np.random.Generator, cap: int = RANGING_CAP) -> ObservationBatch:
    """Read the given burning map under both drones' footprints.

    Oversized footprints are subsampled uniformly without replacement, so a
    batch never exceeds 2*cap entries.
    """
    size = burning.shape[0]
    flat = burning.ravel()
    entries = []
    for pos in (state.drone1, state.drone2):
        for idx in ranging_cells(pos, size, rng, cap):
            entries.append((CellIndex(int(idx) // size, int(idx) % size),
                            bool(flat[idx])))
    return ObservationBatch(entries)


@dataclass(frozen=True)
class PenaltyParams:
    """Reward weights: tau1 scales observed uncertainty, tau2/tau3 are the
    drone-proximity and manned-aircraft-corridor penalties, tau4 the leash
    to the fire origin. Distances in meters."""

    tau1: float = 1.0
    tau2: float = 50.0
    tau3: float = 500.0
    tau4: float = 0.01
    d_u: float = 40.0
    d_m: float = 100.0


def drones_too_close(state: SurveillanceState, params: PenaltyParams) -> bool:
    p1 = drone_position_m(state.drone1)
    p2 = drone_position_m(state.drone2)
    d = math.dist(p1, p2)
    return d <= params.d_u


def near_axis(state: SurveillanceState, aoa: AxisOfAdvance,
              params: PenaltyParams) -> bool:
    for pos in (state.drone1, state.drone2):
        r_m, c_m, _ = drone_position_m(pos)
        if aoa.distance_m((r_m, c_m)) <= params.d_m:
            return True
    return False


def origin_distance_m(state: SurveillanceState, origin: CellIndex) -> float:
    """Summed horizontal distance from each drone's ground block to the
    origin point; exactly zero while a drone hovers over the origin."""
    o = cell_center_m(origin)
    half = AIR_CELL_M / 2.0
    total = 0.0
    for pos in (state.drone1, state.drone2):
        r_m, c_m, _ = drone_position_m(pos)
        dr = max(0.0, abs(r_m - o[0]) - half)
        dc = max(0.0, abs(c_m - o[1]) - half)
        total += math.hypot(dr, dc)
    return total


def surveillance_reward(state: SurveillanceState, uncertainty: np.ndarray,
                        observed: ObservationBatch | set[CellIndex],
                        aoa: AxisOfAdvance | None, origin: CellIndex,
                        params: PenaltyParams) -> float:
    """Observed-uncertainty payoff minus stacking, corridor, and leash
    penalties. The corridor penalty fires on horizontal distance alone, at
    any altitude; the leash uses horizontal distance to the fire origin."""
    cells = observed.cells() if isinstance(observed, ObservationBatch) else observed
    gain = params.tau1 * float(sum(uncertainty[r, c] for r, c in cells))
    penalty = 0.0
    if drones_too_close(state, params):
        penalty += params.tau2
    if aoa is not None and near_axis(state, aoa, params):
        penalty += params.tau3
    penalty += params.tau4 * origin_distance_m(state, origin)
    return gain - penalty
