"""Stochastic fire spread on the cell grid.

Each minute a cell's next burning state is sampled from an ignition
probability built from its 8-adjacent neighbors, wind alignment, and slope.
Fuel drains while a cell burns; retardant drops reduce fuel and damp both
survival and ignition inside their footprint on the minute they land.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import CELL_SIZE_M, CellIndex, Scenario, WindPhase, WorldState

# Moore adjacency, (drow, dcol) from a cell to its neighbor.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen=True)
class PropagationParams:
    """Spread model constants.

    p0: base per-neighbor ignition probability per minute.
    wind_bias / slope_bias: linear gains on wind alignment and upslope run.
    alpha: fuel burned per minute by a burning cell.
    gamma_full / gamma_partial: fuel removed by a drop's full / partial cells.
    p_partial: survival (and ignition damping) probability under partial
        suppression; full suppression forces both to zero.
    """

    p0: float = 0.09
    wind_bias: float = 0.75
    slope_bias: float = 3.0
    alpha: int = 1
    gamma_full: int = 10
    gamma_partial: int = 1
    p_partial: float = 0.5

    def validate(self) -> None:
        if not (0.0 <= self.p0 <= 1.0):
            raise ValueError("p0 must lie in [0, 1]")
        if not (0.0 <= self.p_partial <= 1.0):
            raise ValueError("p_partial must lie in [0, 1]")
        if self.alpha < 0 or self.gamma_full < 0 or self.gamma_partial < 0:
            raise ValueError("fuel decrements must be non-negative")


@dataclass(frozen=True)
class SuppressionOutcome:
    """Footprint of one executed drop: fully suppressed cells and the
    partially suppressed fringe. Disjoint by construction."""

    full_cells: tuple[CellIndex, ...]
    partial_cells: tuple[CellIndex, ...]

    def masks(self, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        full = np.zeros(shape, dtype=bool)
        part = np.zeros(shape, dtype=bool)
        for r, c in self.full_cells:
            full[r, c] = True
        for r, c in self.partial_cells:
            part[r, c] = True
        return full, part


def _wind_vector(phase: WindPhase) -> tuple[float, float]:
    # (row, col) components of the direction wind blows toward;
    # angle 0 points +col (east), pi/2 points -row (north).
    return (-math.sin(phase.direction) * phase.strength,
            math.cos(phase.direction) * phase.strength)


def pair_probability(offset: tuple[int, int], slope: float,
                     wind: WindPhase | None, params: PropagationParams) -> float:
    """Ignition probability contribution from a burning neighbor displaced by
    `offset` from the target cell (neighbor = target + offset)."""
    dr, dc = offset
    run = math.hypot(dr, dc)
    # propagation direction: neighbor -> target = -offset
    ur, uc = -dr / run, -dc / run
    w = 0.0
    if wind is not None and wind.strength > 0.0:
        wr, wc = _wind_vector(wind)
        w = wr * ur + wc * uc
    p = params.p0 * (1.0 + params.wind_bias * w) * (1.0 + params.slope_bias * slope)
    return min(1.0, max(0.0, p))


def neighbor_ignition_prob(x: CellIndex | tuple[int, int],
                           xp: CellIndex | tuple[int, int],
                           params: PropagationParams,
                           wind: WindPhase | None,
                           elevation: np.ndarray) -> float:
    """p(x, x'): probability a burning neighbor x' ignites x this minute.

    Raises ValueError when the cells are not 8-adjacent.
    """
    dr = xp[0] - x[0]
    dc = xp[1] - x[1]
    if (dr, dc) not in NEIGHBOR_OFFSETS:
        raise ValueError(f"cells {tuple(x)} and {tuple(xp)} are not adjacent")
    run_m = math.hypot(dr, dc) * CELL_SIZE_M
    slope = (float(elevation[x[0], x[1]]) - float(elevation[xp[0], xp[1]])) / run_m
    return pair_probability((dr, dc), slope, wind, params)


def _shift(grid: np.ndarray, dr: int, dc: int, fill=0) -> np.ndarray:
    """out[r, c] = grid[r + dr, c + dc], out-of-range filled."""
    h, w = grid.shape
    out = np.full_like(grid, fill)
    src_r = slice(max(dr, 0), h + min(dr, 0))
    src_c = slice(max(dc, 0), w + min(dc, 0))
    dst_r = slice(max(-dr, 0), h + min(-dr, 0))
    dst_c = slice(max(-dc, 0), w + min(-dc, 0))
    out[dst_r, dst_c] = grid[src_r, src_c]
    return out


def ignition_kernel(elevation: np.ndarray, wind: WindPhase | None,
                    params: PropagationParams) -> list[tuple[tuple[int, int], np.ndarray]]:
    """Per-neighbor-offset probability grids p(x, x+offset) for one wind
    phase. Boundary entries where the neighbor falls off the grid are unused
    (the neighbor can never burn there)."""
    elev = elevation.astype(np.float64)
    kernel = []
    for dr, dc in NEIGHBOR_OFFSETS:
        run_m = math.hypot(dr, dc) * CELL_SIZE_M
        slope = (elev - _shift(elev, dr, dc, fill=0.0)) / run_m
        run = math.hypot(dr, dc)
        ur, uc = -dr / run, -dc / run
        w = 0.0
        if wind is not None and wind.strength > 0.0:
            wr, wc = _wind_vector(wind)
            w = wr * ur + wc * uc
        p = params.p0 * (1.0 + params.wind_bias * w) * (1.0 + params.slope_bias * slope)
        kernel.append(((dr, dc), np.clip(p, 0.0, 1.0)))
    return kernel


def scenario_kernel(scenario: Scenario, params: PropagationParams,
                    minute: float) -> list[tuple[tuple[int, int], np.ndarray]]:
    """Kernel for the wind phase active at `minute`, cached on the scenario."""
    phase = scenario.wind_phase_at(minute)
    key = (phase, params)
    cached = scenario._kernel_cache.get(key)
    if cached is None:
        cached = ignition_kernel(scenario.elevation, phase, params)
        scenario._kernel_cache[key] = cached
    return cached


def _delta_grid(shape: tuple[int, int], params: PropagationParams,
                suppression: SuppressionOutcome | None) -> np.ndarray | None:
    if suppression is None:
        return None
    delta = np.ones(shape, dtype=np.float64)
    full, part = suppression.masks(shape)
    delta[part] = params.p_partial
    delta[full] = 0.0
    return delta


def ignition_probability_grid(burning: np.ndarray, fuel: np.ndarray,
                              kernel, params: PropagationParams,
                              delta: np.ndarray | None = None) -> np.ndarray:
    """Next-minute burning probability for every cell.

    Out of fuel: 0. Already burning: delta (continues unless suppressed).
    Otherwise: delta times the ignition hazard from burning neighbors.
    """
    h, w = burning.shape
    # zero-padded halo so every neighbor shift is a view, not a copy
    padded = np.zeros((h + 2, w + 2), dtype=np.float64)
    padded[1:-1, 1:-1] = burning
    not_ignited = np.ones((h, w), dtype=np.float64)
    tmp = np.empty((h, w), dtype=np.float64)
    for (dr, dc), pgrid in kernel:
        nb = padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w]
        np.multiply(pgrid, nb, out=tmp)
        np.subtract(1.0, tmp, out=tmp)
        np.multiply(not_ignited, tmp, out=not_ignited)
    hazard = 1.0 - not_ignited
    if delta is None:
        prob = np.where(burning, 1.0, hazard)
    else:
        prob = np.where(burning, delta, delta * hazard)
    return np.where(fuel > 0, prob, 0.0)


def ignition_probability(x: CellIndex | tuple[int, int],
                         burning: np.ndarray, fuel: np.ndarray,
                         elevation: np.ndarray, wind: WindPhase | None,
                         params: PropagationParams,
                         suppression: SuppressionOutcome | None = None,
                         is_suppression_step: bool = False) -> float:
    """Scalar next-minute burning probability for one cell."""
    r, c = x
    if fuel[r, c] <= 0:
        return 0.0
    delta = 1.0
    if is_suppression_step and suppression is not None:
        cell = CellIndex(r, c)
        if cell in suppression.full_cells:
            delta = 0.0
        elif cell in suppression.partial_cells:
            delta = params.p_partial
    if burning[r, c]:
        return delta
    h, w = burning.shape
    survive = 1.0
    for dr, dc in NEIGHBOR_OFFSETS:
        nr, nc = r + dr, c + dc
        if 0 <= nr < h and 0 <= nc < w and burning[nr, nc]:
            p = neighbor_ignition_prob((r, c), (nr, nc), params, wind, elevation)
            survive *= 1.0 - p
    return delta * (1.0 - survive)


def fuel_update(x: CellIndex | tuple[int, int], burning: np.ndarray,
                fuel: np.ndarray, params: PropagationParams,
                suppression: SuppressionOutcome | None = None,
                is_suppression_step: bool = False) -> int:
    """Scalar next-minute fuel for one cell."""
    r, c = x
    beta = 0
    if is_suppression_step and suppression is not None:
        cell = CellIndex(r, c)
        if cell in suppression.full_cells:
            beta = params.gamma_full
        elif cell in suppression.partial_cells:
            beta = params.gamma_partial
    drain = beta + (params.alpha if burning[r, c] else 0)
    return max(0, int(fuel[r, c]) - drain)


def step_grids(burning: np.ndarray, fuel: np.ndarray, kernel,
               params: PropagationParams, rng: np.random.Generator,
               suppression: SuppressionOutcome | None = None
               ) -> tuple[np.ndarray, np.ndarray]:
    """One propagation minute on raw grids; returns (burning', fuel').

    A full-shape uniform draw keeps results seed-deterministic regardless of
    how cells are evaluated.
    """
    delta = _delta_grid(burning.shape, params, suppression)
    prob = ignition_probability_grid(burning, fuel, kernel, params, delta)
    draws = rng.random(burning.shape)
    next_burning = draws < prob

    drain = np.where(burning, params.alpha, 0).astype(np.int64)
    if suppression is not None:
        full, part = suppression.masks(burning.shape)
        drain = drain + np.where(full, params.gamma_full, 0)
        drain = drain + np.where(part, params.gamma_partial, 0)
    next_fuel = np.maximum(0, fuel - drain)
    return next_burning, next_fuel


def step(world: WorldState, suppression: SuppressionOutcome | None,
         params: PropagationParams, scenario: Scenario,
         rng: np.random.Generator) -> WorldState:
    """Advance the true world one minute; a non-None suppression marks this
    minute as the drop's landing step."""
    kernel = scenario_kernel(scenario, params, world.clock_t)
    burning, fuel = step_grids(world.burning, world.fuel, kernel, params, rng,
                               suppression)
    return WorldState(burning, fuel, world.clock_t + 1)


def active_window(mask: np.ndarray, margin: int) -> tuple[int, int, int, int]:
    """Slice bounds (r0, r1, c0, c1) covering the mask's true cells plus a
    margin on every side; the whole grid when the mask is empty."""
    h, w = mask.shape
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return (0, h, 0, w)
    cols = np.flatnonzero(mask.any(axis=0))
    return (max(0, int(rows[0]) - margin), min(h, int(rows[-1]) + margin + 1),
            max(0, int(cols[0]) - margin), min(w, int(cols[-1]) + margin + 1))


def propagate_internal(belief_burning: np.ndarray, depth: int,
                       scenario: Scenario, params: PropagationParams,
                       rng: np.random.Generator, minute: float = 0.0,
                       window: tuple[int, int, int, int] | None = None
                       ) -> np.ndarray:
    """Planner-side rollout of a believed burning map `depth` minutes ahead.

    The internal model knows wind and terrain but not true fuel; every cell
    is assumed to hold the scenario's median initial fuel.

    `window` restricts computation and random draws to a subgrid; the caller
    must ensure it contains every cell the fire can reach within `depth`
    steps (spread is one cell per step, so the active region plus a `depth`
    margin suffices). Results are bit-for-bit reproducible for a fixed seed
    and window, but the window shape sets the draw pattern, so calls with
    different windows are different random experiments.
    """
    out = belief_burning.copy()
    if depth <= 0:
        return out
    if window is None:
        r0, r1, c0, c1 = 0, out.shape[0], 0, out.shape[1]
    else:
        r0, r1, c0, c1 = window
    b = out[r0:r1, c0:c1].copy()
    fuel = np.full(b.shape, scenario.median_fuel(), dtype=np.int64)
    for i in range(depth):
        kernel = scenario_kernel(scenario, params, minute + i)
        if window is not None:
            kernel = [(off, p[r0:r1, c0:c1]) for off, p in kernel]
        b, fuel = step_grids(b, fuel, kernel, params, rng)
    out[r0:r1, c0:c1] = b
    return out
