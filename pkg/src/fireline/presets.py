"""Spread presets and scenario-derived propagation parameters.

Each preset names a base ignition probability calibrated so an unsuppressed
fire on flat, windless ground burns a target fraction of the grid within the
two-hour horizon: slow under 10%, moderate near 25%, rapid near 50%,
ultrarapid above 80%. The shipped table holds the calibrated values; the
calibrate CLI subcommand can regenerate it.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .grids import Scenario
from .propagation import PropagationParams

SPREAD_PRESETS = ("slow", "moderate", "rapid", "ultrarapid")

# target fraction of the grid ever burned by t=120, unsuppressed
PRESET_TARGETS = {
    "slow": 0.06,
    "moderate": 0.25,
    "rapid": 0.50,
    "ultrarapid": 0.85,
}

CALIBRATION_TOLERANCE = 0.02


def _default_table_path():
    return resources.files("fireline").joinpath("data/spread_presets.txt")


def load_preset_table(path: str | Path | None = None) -> dict[str, float]:
    """Read `name = p0` lines; unknown preset names are rejected."""
    source = Path(path) if path is not None else _default_table_path()
    table: dict[str, float] = {}
    try:
        text = source.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError(f"spread preset table not found: {source}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'name = value'")
        name, value = (part.strip() for part in line.split("=", 1))
        if name not in SPREAD_PRESETS:
            raise ConfigError(f"{source}:{lineno}: unknown preset '{name}'")
        try:
            table[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value '{value}'") from exc
    missing = [name for name in SPREAD_PRESETS if name not in table]
    if missing:
        raise ConfigError(f"{source}: missing presets {missing}")
    return table


def save_preset_table(table: dict[str, float], path: str | Path) -> None:
    lines = ["# base ignition probability per spread preset"]
    for name in SPREAD_PRESETS:
        lines.append(f"{name} = {table[name]:.6f}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def preset_p0(preset: str, table: dict[str, float] | None = None) -> float:
    if preset not in SPREAD_PRESETS:
        raise ConfigError(f"unknown spread preset '{preset}'")
    if table is None:
        table = load_preset_table()
    return table[preset]


def params_for_scenario(scenario: Scenario,
                        table: dict[str, float] | None = None,
                        **overrides) -> PropagationParams:
    """Propagation parameters for a scenario: preset-calibrated p0, and a
    full-suppression fuel drain large enough to empty any cell in one step."""
    fuel_max = int(scenario.initial_fuel.max()) if scenario.initial_fuel.size else 1
    fields = {
        "p0": preset_p0(scenario.spread_preset, table),
        "gamma_full": max(fuel_max, 1),
    }
    fields.update(overrides)
    params = PropagationParams(**fields)
    params.validate()
    return params
