"""Benchmark cases, spread calibration, multi-seed campaigns, and reports.

Four benchmark cases:

1. flat terrain, steady wind, one high-value resource area;
2. flat terrain, two areas, and a wind shift at minute 60 whose new
   direction is drawn from the run seed (the only randomized element);
3. hilly terrain built from three smooth ridges, three disjoint areas;
4. file-driven: loads the shipped synthetic scenario directory with
   fuel-class bands, a valley profile, and a trade-wind schedule.

Campaigns run the same seeds across every policy so comparisons are paired,
then aggregate final destruction, flame size, and ring radius with
t-distribution confidence intervals and Welch tests.
"""

from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

import numpy as np
from scipy import stats

from .episode import EpisodeLog, DispatchPolicy, SurveillanceMode, \
    SurveillanceSetup, SuppressionSetup, Timeline, run_episode
from .errors import CalibrationError, ConfigError
from .grids import GRID_SIZE, CellIndex, Scenario, WindPhase
from .presets import CALIBRATION_TOLERANCE, PRESET_TARGETS, SPREAD_PRESETS, \
    load_preset_table, params_for_scenario, save_preset_table
from .propagation import PropagationParams, step
from .scenario_io import load_scenario

METRICS = ("destruction", "flame_size", "ring_radius")
_METRIC_FIELDS = {"destruction": "destruction", "flame_size": "burning_count",
                  "ring_radius": "ring_radius_m"}

CASE_IDS = (1, 2, 3, 4)


@dataclass(frozen=True)
class CaseDefinition:
    id: int
    terrain: str = "flat"
    area_count: int = 1
    wind_shift_minute: float | None = None

    @classmethod
    def for_id(cls, case_id: int) -> "CaseDefinition":
        if case_id == 1:
            return cls(1, "flat", 1, None)
        if case_id == 2:
            return cls(2, "flat", 2, 60.0)
        if case_id == 3:
            return cls(3, "hilly", 3, None)
        if case_id == 4:
            return cls(4, "file", 0, None)
        raise ConfigError(f"unknown case id {case_id}")


def _block(grid: np.ndarray, r0: int, c0: int, side: int,
           inner_value: float, outer_value: float) -> None:
    """High-value area: a square block with a pricier core so the resource
    values are unevenly distributed (drives the wet-line baseline)."""
    grid[r0:r0 + side, c0:c0 + side] = outer_value
    pad = side // 2 - 2
    grid[r0 + pad:r0 + side - pad, c0 + pad:c0 + side - pad] = inner_value


def _ridge(elev: np.ndarray, center: tuple[float, float], height: float,
           sigma: float) -> None:
    rows = np.arange(GRID_SIZE)[:, None]
    cols = np.arange(GRID_SIZE)[None, :]
    d2 = (rows - center[0]) ** 2 + (cols - center[1]) ** 2
    elev += height * np.exp(-d2 / (2.0 * sigma ** 2))


def _base_grids() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    fuel = np.full((GRID_SIZE, GRID_SIZE), 10, dtype=np.int64)
    elevation = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.float64)
    resources = np.zeros((GRID_SIZE, GRID_SIZE), dtype=np.float64)
    return fuel, elevation, resources


def _central_ignition() -> list[CellIndex]:
    return [CellIndex(50, 50), CellIndex(50, 51),
            CellIndex(51, 50), CellIndex(51, 51)]


def case4_data_dir() -> Path:
    return Path(importlib_resources.files("fireline").joinpath("data/case4"))


def build_case(definition: CaseDefinition | int, seed: int,
               spread_preset: str | None = None) -> Scenario:
    """Construct the scenario for a benchmark case. Only case 2 consumes the
    seed (its post-shift wind direction); everything else is fixed."""
    if isinstance(definition, int):
        definition = CaseDefinition.for_id(definition)
    if definition.id not in CASE_IDS:
        raise ConfigError(f"unknown case id {definition.id}")

    if definition.id == 4:
        scenario = load_scenario(case4_data_dir())
        if spread_preset:
            scenario.spread_preset = spread_preset
            scenario.validate()
        return scenario

    fuel, elevation, resources = _base_grids()
    preset = spread_preset or "moderate"

    if definition.id == 1:
        _block(resources, 20, 60, 10, 5.0, 1.0)
        wind = [WindPhase(direction=1.05, strength=0.5, switch_time=None)]
        name = "case1-flat-single-area"
    elif definition.id == 2:
        _block(resources, 20, 20, 10, 5.0, 1.0)
        _block(resources, 70, 70, 10, 5.0, 1.0)
        shift_rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
        new_direction = float(shift_rng.uniform(0.0, 2.0 * math.pi))
        wind = [WindPhase(direction=math.pi / 4, strength=0.4,
                          switch_time=definition.wind_shift_minute),
                WindPhase(direction=new_direction, strength=0.4,
                          switch_time=None)]
        name = "case2-flat-wind-shift"
    else:
        _ridge(elevation, (25.0, 30.0), 45.0, 12.0)
        _ridge(elevation, (70.0, 55.0), 60.0, 15.0)
        _ridge(elevation, (35.0, 80.0), 35.0, 9.0)
        _block(resources, 10, 10, 10, 5.0, 1.0)
        _block(resources, 80, 25, 10, 5.0, 1.0)
        _block(resources, 15, 75, 10, 5.0, 1.0)
        wind = [WindPhase(direction=2.0, strength=0.3, switch_time=None)]
        name = "case3-hilly-three-areas"

    scenario = Scenario(
        initial_fuel=fuel,
        elevation=elevation,
        resources=resources,
        wind=wind,
        ignition_cells=_central_ignition(),
        origin=CellIndex(50, 50),
        water_source=(220.0, 100.0),
        spread_preset=preset,
        name=name,
    )
    scenario.validate()
    return scenario


def calibration_scenario(p0_placeholder: str = "moderate") -> Scenario:
    """Flat, windless, resource-free field used to fit preset p0 values."""
    fuel, elevation, resources = _base_grids()
    scenario = Scenario(
        initial_fuel=fuel,
        elevation=elevation,
        resources=resources,
        wind=[WindPhase(direction=0.0, strength=0.0, switch_time=None)],
        ignition_cells=_central_ignition(),
        origin=CellIndex(50, 50),
        water_source=(220.0, 100.0),
        spread_preset=p0_placeholder,
        name="calibration-field",
    )
    scenario.validate()
    return scenario


def burned_fraction(p0: float, seeds: list[int], horizon: int = 120) -> float:
    """Mean fraction of the grid ever ignited by the horizon, unsuppressed,
    on the calibration field."""
    scenario = calibration_scenario()
    params = PropagationParams(p0=p0, gamma_full=10)
    total = 0.0
    for seed in seeds:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 17]))
        world = scenario.initial_world()
        ever = world.burning.copy()
        for _ in range(horizon):
            world = step(world, None, params, scenario, rng)
            ever |= world.burning
        total += ever.sum() / ever.size
    return total / len(seeds)


P0_SEARCH_RANGE = (0.005, 0.5)


def calibrate_spread(preset: str, target_burn_fraction: float | None = None,
                     tolerance: float = CALIBRATION_TOLERANCE,
                     seeds: list[int] | None = None,
                     table_path: str | Path | None = None) -> float:
    """Bisect p0 until the mean unsuppressed burned fraction at the horizon
    sits within tolerance of the preset's target. When `table_path` is given
    the calibrated value is merged into the table file there."""
    if preset not in SPREAD_PRESETS:
        raise ConfigError(f"unknown spread preset '{preset}'")
    target = PRESET_TARGETS[preset] if target_burn_fraction is None \
        else target_burn_fraction
    if not (0.0 <= target < 1.0):
        raise ConfigError("target burn fraction must lie in [0, 1)")
    seeds = seeds if seeds is not None else list(range(8))

    lo, hi = P0_SEARCH_RANGE
    f_lo = burned_fraction(lo, seeds)
    if target <= f_lo + tolerance:
        p0 = lo
    else:
        f_hi = burned_fraction(hi, seeds)
        if f_hi < target - tolerance:
            raise CalibrationError(
                f"target {target:.3f} unreachable: burn fraction at "
                f"p0={hi} is only {f_hi:.3f}")
        p0 = None
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            f_mid = burned_fraction(mid, seeds)
            if abs(f_mid - target) <= tolerance:
                p0 = mid
                break
            if f_mid < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-5:
                break
        if p0 is None:
            raise CalibrationError(
                f"bisection did not reach target {target:.3f} "
                f"within tolerance {tolerance:.3f}")

    if table_path is not None:
        table_path = Path(table_path)
        if table_path.exists():
            table = load_preset_table(table_path)
        else:
            table = load_preset_table()
        table[preset] = p0
        save_preset_table(table, table_path)
    return p0


@dataclass
class CampaignConfig:
    spread: str | None = None
    surveillance: str = "uncertainty"
    perfect_info: bool = False
    dispatch: bool = False
    asr_method: int = 2
    quantile_q: float = 90.0
    rollout_ro: int = 10
    iters: int | None = None
    time_limit_s: float | None = None
    jobs: int = 1

    def surveillance_mode(self) -> SurveillanceMode:
        if self.perfect_info:
            return SurveillanceMode.PERFECT
        return SurveillanceMode(self.surveillance)


@dataclass
class MetricStats:
    mean: float
    ci_lo: float | None
    ci_hi: float | None


@dataclass
class AggregateReport:
    case_id: int
    policies: list[str]
    runs: int
    base_seed: int
    config_hash: str
    finals: dict[str, dict[str, MetricStats]]
    outcomes: dict[str, dict[str, float]]
    series: dict[str, dict[str, dict[str, list[float]]]]
    welch: dict[str, float]
    per_run_finals: dict[str, dict[str, list[float]]]
    ci_defined: bool


def _ci_halfwidth(values: np.ndarray) -> float | None:
    n = values.size
    if n < 2:
        return None
    sd = values.std(ddof=1)
    return float(stats.t.ppf(0.975, n - 1) * sd / math.sqrt(n))


def _metric_stats(values: list[float]) -> MetricStats:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    half = _ci_halfwidth(arr)
    if half is None:
        return MetricStats(mean, None, None)
    return MetricStats(mean, mean - half, mean + half)


def _suppression_setup(policy: str, cfg: CampaignConfig) -> SuppressionSetup | None:
    if policy == "off":
        return None
    setup = SuppressionSetup(policy=policy)
    setup.planner.asr_method = cfg.asr_method
    setup.planner.quantile_q = cfg.quantile_q
    setup.planner.rollout_ro = cfg.rollout_ro
    if cfg.iters is not None:
        setup.planner.mcts.iteration_limit = cfg.iters
    setup.planner.mcts.time_limit_s = cfg.time_limit_s
    return setup


def _surveillance_setup(cfg: CampaignConfig) -> SurveillanceSetup:
    setup = SurveillanceSetup(mode=cfg.surveillance_mode())
    if cfg.iters is not None:
        setup.planner.mcts.iteration_limit = cfg.iters
    setup.planner.mcts.time_limit_s = cfg.time_limit_s
    return setup


def run_one(case: CaseDefinition | int, policy: str, seed: int,
            cfg: CampaignConfig) -> EpisodeLog:
    """One campaign episode: build the case for this seed and simulate."""
    scenario = build_case(case, seed, spread_preset=cfg.spread)
    params = params_for_scenario(scenario)
    log = run_episode(
        scenario,
        _surveillance_setup(cfg),
        _suppression_setup(policy, cfg),
        DispatchPolicy(enabled=cfg.dispatch),
        seed=seed,
        timeline=Timeline(),
        params=params,
    )
    return log


def summarize_log(log: EpisodeLog,
                  horizon: int | None = None) -> tuple[str, dict, dict]:
    """Outcome, final metric values, and horizon-length metric series for
    one episode; early boundary exits are padded with their last value."""
    if horizon is None:
        horizon = Timeline().horizon
    finals = {name: float(getattr(log.final, _METRIC_FIELDS[name]))
              for name in METRICS}
    series = {}
    for name in METRICS:
        vals = [float(getattr(row, _METRIC_FIELDS[name])) for row in log.rows]
        while len(vals) < horizon + 1:
            vals.append(vals[-1])
        series[name] = vals
    outcome = log.outcome.value if log.outcome is not None else ""
    return outcome, finals, series


def _campaign_task(args) -> tuple[str, int, str, dict, dict]:
    case, policy, run_idx, base_seed, cfg, raw_dir = args
    seed = base_seed + run_idx
    log = run_one(case, policy, seed, cfg)
    if raw_dir is not None:
        Path(raw_dir).mkdir(parents=True, exist_ok=True)
        log.to_csv(Path(raw_dir) / f"{policy}_run{run_idx:03d}.csv")
    outcome, finals, series = summarize_log(log)
    return policy, run_idx, outcome, finals, series


def config_hash(case_id: int, policies: list[str], runs: int, base_seed: int,
                cfg: CampaignConfig) -> str:
    payload = json.dumps({
        "case": case_id, "policies": list(policies), "runs": runs,
        "base_seed": base_seed, "config": asdict(cfg),
    }, sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def run_campaign(case: CaseDefinition | int, policies: list[str], runs: int,
                 base_seed: int, cfg: CampaignConfig | None = None,
                 out_dir: str | Path | None = None) -> AggregateReport:
    """Run every policy over the same `runs` seeds and aggregate.

    Raw per-episode CSVs land under `out_dir`/raw; a manifest with the seeds
    and a hash of the full configuration lands at `out_dir`/manifest.json.
    Episodes run in parallel when cfg.jobs > 1; aggregation order is fixed
    by (policy, run index), so results are independent of scheduling.
    """
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    if not policies:
        raise ConfigError("need at least one policy")
    cfg = cfg or CampaignConfig()
    if isinstance(case, int):
        case = CaseDefinition.for_id(case)

    raw_dir = Path(out_dir) / "raw" if out_dir is not None else None
    tasks = [(case, policy, run_idx, base_seed, cfg, raw_dir)
             for policy in policies for run_idx in range(runs)]

    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_campaign_task, tasks))
    else:
        results = [_campaign_task(task) for task in tasks]

    by_key = {(policy, run_idx): (outcome, finals, series)
              for policy, run_idx, outcome, finals, series in results}
    digest = config_hash(case.id, policies, runs, base_seed, cfg)
    report = build_aggregate(case.id, policies, runs, base_seed, digest, by_key)

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            "case": case.id,
            "policies": list(policies),
            "runs": runs,
            "base_seed": base_seed,
            "seeds": [base_seed + i for i in range(runs)],
            "config": asdict(cfg),
            "config_hash": digest,
            "raw_files": sorted(f"raw/{policy}_run{idx:03d}.csv"
                                for policy in policies
                                for idx in range(runs)),
        }
        (out_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
    return report


def build_aggregate(case_id: int, policies: list[str], runs: int,
                    base_seed: int, digest: str,
                    by_key: dict) -> AggregateReport:
    """Deterministic reduce over per-episode summaries keyed by
    (policy, run index)."""
    finals_all: dict[str, dict[str, list[float]]] = {}
    outcome_counts: dict[str, dict[str, int]] = {}
    series_all: dict[str, dict[str, list[list[float]]]] = {}
    for policy in policies:
        finals_all[policy] = {name: [] for name in METRICS}
        outcome_counts[policy] = {}
        series_all[policy] = {name: [] for name in METRICS}
        for run_idx in range(runs):
            outcome, finals, series = by_key[(policy, run_idx)]
            outcome_counts[policy][outcome] = \
                outcome_counts[policy].get(outcome, 0) + 1
            for name in METRICS:
                finals_all[policy][name].append(finals[name])
                series_all[policy][name].append(series[name])

    finals_stats = {policy: {name: _metric_stats(vals)
                             for name, vals in per_metric.items()}
                    for policy, per_metric in finals_all.items()}
    outcomes = {policy: {name: count / runs
                         for name, count in sorted(counts.items())}
                for policy, counts in outcome_counts.items()}

    series_stats: dict[str, dict[str, dict[str, list[float]]]] = {}
    for policy in policies:
        series_stats[policy] = {}
        for name in METRICS:
            runs_matrix = np.asarray(series_all[policy][name])
            mean = runs_matrix.mean(axis=0)
            lo, hi = [], []
            for col in range(runs_matrix.shape[1]):
                half = _ci_halfwidth(runs_matrix[:, col])
                if half is None:
                    lo.append(float("nan"))
                    hi.append(float("nan"))
                else:
                    lo.append(float(mean[col]) - half)
                    hi.append(float(mean[col]) + half)
            series_stats[policy][name] = {
                "minutes": [float(m) for m in range(runs_matrix.shape[1])],
                "mean": [float(v) for v in mean],
                "ci_lo": lo,
                "ci_hi": hi,
            }

    welch: dict[str, float] = {}
    if runs >= 2:
        for i, pa in enumerate(policies):
            for pb in policies[i + 1:]:
                a = np.asarray(finals_all[pa]["destruction"])
                b = np.asarray(finals_all[pb]["destruction"])
                if np.allclose(a, a[0]) and np.allclose(b, b[0]) \
                        and np.isclose(a[0], b[0]):
                    welch[f"{pa} vs {pb}"] = 1.0
                else:
                    welch[f"{pa} vs {pb}"] = float(
                        stats.ttest_ind(a, b, equal_var=False).pvalue)

    return AggregateReport(
        case_id=case_id,
        policies=list(policies),
        runs=runs,
        base_seed=base_seed,
        config_hash=digest,
        finals=finals_stats,
        outcomes=outcomes,
        series=series_stats,
        welch=welch,
        per_run_finals=finals_all,
        ci_defined=runs >= 2,
    )


def load_campaign(out_dir: str | Path) -> AggregateReport:
    """Rebuild the aggregate report of a finished campaign from its manifest
    and raw episode CSVs."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.exists():
        raise ConfigError(f"no campaign manifest at {manifest_path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    policies = manifest["policies"]
    runs = manifest["runs"]
    by_key = {}
    for policy in policies:
        for run_idx in range(runs):
            path = out_dir / "raw" / f"{policy}_run{run_idx:03d}.csv"
            if not path.exists():
                raise ConfigError(f"campaign raw file missing: {path}")
            log = EpisodeLog.from_csv(path)
            by_key[(policy, run_idx)] = summarize_log(log)
    return build_aggregate(manifest["case"], policies, runs,
                           manifest["base_seed"], manifest["config_hash"],
                           by_key)


REPORT_FORMATS = ("csv", "text", "svg")


def emit_report(report: AggregateReport, fmt: str,
                out_dir: str | Path) -> list[Path]:
    """Write report files under out_dir and return their paths.

    csv: one file per metric, a header row, one row per minute.
    text: a single human-readable summary.
    svg: one plot per policy per metric (mean line, CI band).
    """
    if fmt not in REPORT_FORMATS:
        raise ConfigError(f"unknown report format '{fmt}'")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        return _emit_csv(report, out_dir)
    if fmt == "text":
        return _emit_text(report, out_dir)
    return _emit_svg(report, out_dir)


def _emit_csv(report: AggregateReport, out_dir: Path) -> list[Path]:
    written = []
    for name in METRICS:
        path = out_dir / f"{name}.csv"
        header = ["minute"]
        for policy in report.policies:
            header += [f"{policy}_mean", f"{policy}_ci_lo", f"{policy}_ci_hi"]
        lines = [",".join(header)]
        if report.policies:
            minutes = report.series[report.policies[0]][name]["minutes"]
            for i, minute in enumerate(minutes):
                row = [f"{minute:g}"]
                for policy in report.policies:
                    s = report.series[policy][name]
                    row += [f"{s['mean'][i]:.6f}", f"{s['ci_lo'][i]:.6f}",
                            f"{s['ci_hi'][i]:.6f}"]
                lines.append(",".join(row))
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written


def _fmt_stats(ms: MetricStats) -> str:
    if ms.ci_lo is None:
        return f"{ms.mean:.2f} (CI undefined: single run)"
    half = ms.ci_hi - ms.mean
    return f"{ms.mean:.2f} +/- {half:.2f} (95% CI)"


def _emit_text(report: AggregateReport, out_dir: Path) -> list[Path]:
    lines = [f"case {report.case_id}, {report.runs} run(s), "
             f"base seed {report.base_seed}",
             f"config hash {report.config_hash}", ""]
    if not report.ci_defined:
        lines.append("note: confidence intervals undefined with a single run")
        lines.append("")
    for policy in report.policies:
        lines.append(f"policy: {policy}")
        for name in METRICS:
            lines.append(f"  final {name}: {_fmt_stats(report.finals[policy][name])}")
        parts = [f"{k}={v:.2f}" for k, v in report.outcomes[policy].items()]
        lines.append("  outcomes: " + (", ".join(parts) if parts else "none"))
        lines.append("")
    if report.welch:
        lines.append("Welch tests on final destruction (p-values):")
        for pair, p in sorted(report.welch.items()):
            lines.append(f"  {pair}: p={p:.4f}")
        lines.append("")
    path = out_dir / "summary.txt"
    path.write_text("\n".join(lines), encoding="utf-8")
    return [path]


def _emit_svg(report: AggregateReport, out_dir: Path) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "fireline"
    written = []
    for policy in report.policies:
        for name in METRICS:
            s = report.series[policy][name]
            fig, ax = plt.subplots(figsize=(6, 4))
            minutes = s["minutes"]
            ax.plot(minutes, s["mean"], color="tab:red", label="mean")
            lo = np.asarray(s["ci_lo"])
            hi = np.asarray(s["ci_hi"])
            if not np.isnan(lo).all():
                ax.fill_between(minutes, lo, hi, color="tab:red", alpha=0.25,
                                label="95% CI")
            ax.set_xlabel("minute")
            ax.set_ylabel(name.replace("_", " "))
            ax.set_title(f"{policy}: {name.replace('_', ' ')}")
            ax.legend(loc="upper left")
            path = out_dir / f"{policy}_{name}.svg"
            fig.savefig(path, format="svg", metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written
