"""Scenario directory format.

A scenario lives in a directory of four files:

* ``fuel.csv``       100 rows of 100 comma-separated integers
* ``elevation.csv``  100 rows of 100 comma-separated floats, meters
* ``resources.csv``  100 rows of 100 comma-separated non-negative floats
* ``scenario.txt``   flat key-value metadata

``scenario.txt`` keys (one per line, ``key = value``, ``#`` comments):

* ``name``            free text (optional)
* ``spread``          one of slow, moderate, rapid, ultrarapid
* ``origin``          ``row,col``
* ``ignition``        ``row,col; row,col; ...``
* ``water_source_m``  ``row_m,col_m`` (meters, may lie outside the grid)
* ``wind``            ``direction_rad, strength[, switch_minute]``;
                      repeatable, listed in activation order, only the last
                      phase may omit the switch minute
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ScenarioFormatError
from .grids import GRID_SIZE, CellIndex, Scenario, WindPhase

LAYER_FILES = ("fuel.csv", "elevation.csv", "resources.csv", "scenario.txt")


def _load_grid(path: Path, dtype) -> np.ndarray:
    if not path.exists():
        raise ScenarioFormatError(f"missing scenario layer: {path}")
    try:
        grid = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc
    if grid.shape != (GRID_SIZE, GRID_SIZE):
        raise ScenarioFormatError(
            f"{path}: expected {GRID_SIZE}x{GRID_SIZE}, got {grid.shape}")
    return grid.astype(dtype)


def _parse_pair(value: str, caster, key: str, path: Path):
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2:
        raise ScenarioFormatError(f"{path}: key '{key}' needs two values")
    try:
        return caster(parts[0]), caster(parts[1])
    except ValueError as exc:
        raise ScenarioFormatError(f"{path}: key '{key}': {exc}") from exc


def _parse_metadata(path: Path) -> dict:
    if not path.exists():
        raise ScenarioFormatError(f"missing scenario layer: {path}")
    meta = {"name": "", "wind": []}
    seen = set()
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioFormatError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key != "wind" and key in seen:
            raise ScenarioFormatError(f"{path}:{lineno}: duplicate key '{key}'")
        seen.add(key)
        if key == "name":
            meta["name"] = value
        elif key == "spread":
            meta["spread"] = value
        elif key == "origin":
            r, c = _parse_pair(value, int, key, path)
            meta["origin"] = CellIndex(r, c)
        elif key == "ignition":
            cells = []
            for chunk in value.split(";"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                r, c = _parse_pair(chunk, int, key, path)
                cells.append(CellIndex(r, c))
            meta["ignition"] = cells
        elif key == "water_source_m":
            meta["water_source_m"] = _parse_pair(value, float, key, path)
        elif key == "wind":
            parts = [p.strip() for p in value.split(",")]
            if len(parts) not in (2, 3):
                raise ScenarioFormatError(
                    f"{path}:{lineno}: wind needs 'direction, strength[, switch]'")
            try:
                direction = float(parts[0])
                strength = float(parts[1])
                switch = float(parts[2]) if len(parts) == 3 else None
            except ValueError as exc:
                raise ScenarioFormatError(f"{path}:{lineno}: {exc}") from exc
            meta["wind"].append(WindPhase(direction, strength, switch))
        else:
            raise ScenarioFormatError(f"{path}:{lineno}: unknown key '{key}'")
    for required in ("spread", "origin", "ignition", "water_source_m"):
        if required not in meta:
            raise ScenarioFormatError(f"{path}: missing key '{required}'")
    if not meta["wind"]:
        raise ScenarioFormatError(f"{path}: needs at least one wind line")
    return meta


def load_scenario(directory: str | Path) -> Scenario:
    directory = Path(directory)
    if not directory.is_dir():
        raise ScenarioFormatError(f"scenario directory not found: {directory}")
    fuel = _load_grid(directory / "fuel.csv", np.int64)
    elevation = _load_grid(directory / "elevation.csv", np.float64)
    resources = _load_grid(directory / "resources.csv", np.float64)
    meta = _parse_metadata(directory / "scenario.txt")
    scenario = Scenario(
        initial_fuel=fuel,
        elevation=elevation,
        resources=resources,
        wind=meta["wind"],
        ignition_cells=meta["ignition"],
        origin=meta["origin"],
        water_source=meta["water_source_m"],
        spread_preset=meta["spread"],
        name=meta["name"] or directory.name,
    )
    try:
        scenario.validate()
    except ValueError as exc:
        raise ScenarioFormatError(f"{directory}: {exc}") from exc
    return scenario


def save_scenario(scenario: Scenario, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.savetxt(directory / "fuel.csv", scenario.initial_fuel,
               fmt="%d", delimiter=",")
    np.savetxt(directory / "elevation.csv", scenario.elevation,
               fmt="%.3f", delimiter=",")
    np.savetxt(directory / "resources.csv", scenario.resources,
               fmt="%.3f", delimiter=",")
    lines = []
    if scenario.name:
        lines.append(f"name = {scenario.name}")
    lines.append(f"spread = {scenario.spread_preset}")
    lines.append(f"origin = {scenario.origin.row},{scenario.origin.col}")
    cells = "; ".join(f"{c.row},{c.col}" for c in scenario.ignition_cells)
    lines.append(f"ignition = {cells}")
    ws = scenario.water_source
    lines.append(f"water_source_m = {ws[0]:.1f},{ws[1]:.1f}")
    for phase in scenario.wind:
        tail = f", {phase.switch_time:g}" if phase.switch_time is not None else ""
        lines.append(f"wind = {phase.direction:.6f}, {phase.strength:.6f}{tail}")
    (directory / "scenario.txt").write_text("\n".join(lines) + "\n",
                                            encoding="utf-8")
