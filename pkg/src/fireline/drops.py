"""Retardant drop actions: footprints, approach axes, and cadence.

A drop is a (center cell, pattern) pair. Patterns share one water load, so
full-coverage core plus half-weighted fringe is nearly equal across types.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .grids import GRID_SIZE, CellIndex, cell_center_m
from .propagation import PropagationParams, SuppressionOutcome

KNOTS_TO_KM_PER_MIN = 1.852 / 60.0
DEFAULT_OVERHEAD_MIN = 1.0  # fill, approach, and release


class DropType(Enum):
    POINT = "point"
    LINE_NS = "line_NS"
    LINE_EW = "line_EW"
    LINE_NE_SW = "line_NE_SW"
    LINE_NW_SE = "line_NW_SE"


DROP_TYPES: tuple[DropType, ...] = tuple(DropType)


@dataclass(frozen=True)
class SuppressionActionSpec:
    center: CellIndex
    drop: DropType


@dataclass(frozen=True)
class FootprintTemplate:
    """Cell offsets of a drop pattern around its center: `full` gets the
    whole load, `partial` is the overspray fringe."""

    full: tuple[tuple[int, int], ...]
    partial: tuple[tuple[int, int], ...]


def _ring_around(core: set[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    ring = set()
    for r, c in core:
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                ring.add((r + dr, c + dc))
    return tuple(sorted(ring - core))


def _template(core: set[tuple[int, int]]) -> FootprintTemplate:
    return FootprintTemplate(tuple(sorted(core)), _ring_around(core))


def _default_templates() -> dict[DropType, FootprintTemplate]:
    point = {(r, c) for r in range(-2, 2) for c in range(-2, 2)}
    line_ns = {(r, 0) for r in range(-6, 7)}
    line_ew = {(0, c) for c in range(-6, 7)}
    # Diagonal steps are sqrt(2) long, so 9 cells match a 13-cell straight
    # line in ground length and keep the load balance within tolerance.
    line_ne_sw = {(i, -i) for i in range(-4, 5)}
    line_nw_se = {(i, i) for i in range(-4, 5)}
    return {
        DropType.POINT: _template(point),
        DropType.LINE_NS: _template(line_ns),
        DropType.LINE_EW: _template(line_ew),
        DropType.LINE_NE_SW: _template(line_ne_sw),
        DropType.LINE_NW_SE: _template(line_nw_se),
    }


DEFAULT_TEMPLATES: dict[DropType, FootprintTemplate] = _default_templates()

LINE_CORE_LENGTH = len(DEFAULT_TEMPLATES[DropType.LINE_NS].full)


def load_templates(path) -> dict[DropType, FootprintTemplate]:
    """Read a template file: `[type]` section headers followed by
    `full: drow,dcol` / `partial: drow,dcol` lines."""
    by_name = {d.value: d for d in DropType}
    sections: dict[DropType, dict[str, list[tuple[int, int]]]] = {}
    current: dict[str, list[tuple[int, int]]] | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip()
                if name not in by_name:
                    raise ValueError(f"{path}:{lineno}: unknown drop type '{name}'")
                current = {"full": [], "partial": []}
                sections[by_name[name]] = current
                continue
            if current is None:
                raise ValueError(f"{path}:{lineno}: offset line before any [type] header")
            try:
                kind, rest = line.split(":", 1)
                kind = kind.strip()
                dr, dc = (int(v) for v in rest.split(","))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: expected 'full|partial: drow,dcol'") from exc
            if kind not in ("full", "partial"):
                raise ValueError(f"{path}:{lineno}: unknown offset kind '{kind}'")
            current[kind].append((dr, dc))
    out = dict(DEFAULT_TEMPLATES)
    for drop, offs in sections.items():
        out[drop] = FootprintTemplate(tuple(sorted(set(offs["full"]))),
                                      tuple(sorted(set(offs["partial"]) - set(offs["full"]))))
    return out


def save_templates(path, templates: dict[DropType, FootprintTemplate] | None = None) -> None:
    templates = templates or DEFAULT_TEMPLATES
    with open(path, "w", encoding="utf-8") as fh:
        for drop in DROP_TYPES:
            tpl = templates[drop]
            fh.write(f"[{drop.value}]\n")
            for dr, dc in tpl.full:
                fh.write(f"full: {dr},{dc}\n")
            for dr, dc in tpl.partial:
                fh.write(f"partial: {dr},{dc}\n")
            fh.write("\n")


def footprint(action: SuppressionActionSpec,
              templates: dict[DropType, FootprintTemplate] | None = None,
              size: int = GRID_SIZE) -> SuppressionOutcome:
    """Translate the action's template to its center and clip to the grid."""
    tpl = (templates or DEFAULT_TEMPLATES)[action.drop]
    r0, c0 = action.center

    def place(offsets):
        cells = []
        for dr, dc in offsets:
            r, c = r0 + dr, c0 + dc
            if 0 <= r < size and 0 <= c < size:
                cells.append(CellIndex(r, c))
        return tuple(cells)

    return SuppressionOutcome(place(tpl.full), place(tpl.partial))


def total_action_space(size: int = GRID_SIZE) -> int:
    return size * size * len(DROP_TYPES)


@dataclass(frozen=True)
class AxisOfAdvance:
    """Approach corridor of the suppression aircraft: a 2-D line through
    `anchor_m` along unit `direction` (both (row_m, col_m))."""

    anchor_m: tuple[float, float]
    direction: tuple[float, float]

    def distance_m(self, point_m: tuple[float, float]) -> float:
        pr = point_m[0] - self.anchor_m[0]
        pc = point_m[1] - self.anchor_m[1]
        # perpendicular distance to the infinite line
        cross = pr * self.direction[1] - pc * self.direction[0]
        return abs(cross)


_LINE_DIRECTIONS = {
    DropType.LINE_NS: (1.0, 0.0),
    DropType.LINE_EW: (0.0, 1.0),
    DropType.LINE_NE_SW: (1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0)),
    DropType.LINE_NW_SE: (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)),
}


def axis_of_advance(action: SuppressionActionSpec,
                    water_source_m: tuple[float, float]) -> AxisOfAdvance:
    """Line drops are approached along their own orientation; point drops
    along the water-source-to-target track (east on a degenerate track)."""
    anchor = cell_center_m(action.center)
    if action.drop in _LINE_DIRECTIONS:
        return AxisOfAdvance(anchor, _LINE_DIRECTIONS[action.drop])
    dr = anchor[0] - water_source_m[0]
    dc = anchor[1] - water_source_m[1]
    norm = math.hypot(dr, dc)
    if norm < 1e-9:
        return AxisOfAdvance(anchor, (0.0, 1.0))
    return AxisOfAdvance(anchor, (dr / norm, dc / norm))


def apply_suppression(burning: np.ndarray, fuel: np.ndarray | None,
                      action: SuppressionActionSpec, params: PropagationParams,
                      rng: np.random.Generator,
                      templates: dict[DropType, FootprintTemplate] | None = None
                      ) -> tuple[np.ndarray, np.ndarray | None, SuppressionOutcome]:
    """Instantaneous drop model used on belief grids.

    Full cells stop burning outright; partial cells stop independently with
    probability 1 - p_partial. Fuel, when tracked, drains by gamma_full /
    gamma_partial whether or not the cell was burning.
    """
    outcome = footprint(action, templates, size=burning.shape[0])
    b = burning.copy()
    f = fuel.copy() if fuel is not None else None
    for r, c in outcome.full_cells:
        b[r, c] = False
        if f is not None:
            f[r, c] = max(0, f[r, c] - params.gamma_full)
    if outcome.partial_cells:
        draws = rng.random(len(outcome.partial_cells))
        for (r, c), u in zip(outcome.partial_cells, draws):
            if b[r, c] and u < 1.0 - params.p_partial:
                b[r, c] = False
            if f is not None:
                f[r, c] = max(0, f[r, c] - params.gamma_partial)
    return b, f, outcome


@dataclass(frozen=True)
class SuppressionTiming:
    """Drop cadence: one drop every k minutes of d_t each."""

    d_t: float = 1.0
    k: int = 5

    @property
    def d_T(self) -> float:
        return self.k * self.d_t


def drop_cadence(distance_km: float, loaded_kts: float, unloaded_kts: float,
                 d_t: float = 1.0,
                 overhead_min: float = DEFAULT_OVERHEAD_MIN) -> SuppressionTiming:
    """Cadence from the water-source replenishment cycle.

    The cycle flies effective legs of half the separation at each speed
    (staging keeps average transit short) plus a fixed fill-and-release
    overhead; k is the cycle rounded up to whole steps, floored at 1.
    """
    if distance_km < 0:
        raise ValueError("distance must be non-negative")
    if loaded_kts <= 0 or unloaded_kts <= 0:
        raise ValueError("cruise speeds must be positive")
    leg = distance_km / 2.0
    cycle_min = (leg / (loaded_kts * KNOTS_TO_KM_PER_MIN)
                 + leg / (unloaded_kts * KNOTS_TO_KM_PER_MIN)
                 + overhead_min)
    k = max(1, math.ceil(cycle_min / d_t))
    return SuppressionTiming(d_t=d_t, k=k)
