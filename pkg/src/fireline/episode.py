"""Full initial-attack episodes: the minute-scale surveillance loop, the
k-minute suppression cycle, early dispatch of a second aircraft, and
outcome classification.

Per suppression cycle the planner picks a drop one minute before it lands;
that final surveillance call of the cycle is told about the pending drop so
the drones clear the approach corridor. Drops land at minutes congruent to
the manned arrival (mod k), which on the default timeline (arrive 15,
horizon 120, k=5) gives exactly 21 drop slots.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .drops import DropType, SuppressionActionSpec, SuppressionTiming, footprint
from .errors import InsufficientHistoryError
from .grids import BeliefState, CellIndex, ObservationBatch, Scenario, \
    increment_uncertainty, instantaneous_destruction, ring_radius, update_belief
from .propagation import PropagationParams, step
from .suppress import SuppressPlannerConfig, TechniqueMemory, \
    firefighting_technique, plan_suppression
from .surveil import SurveilPlannerConfig, SurveillanceModelKind, plan_surveillance
from .uav import DronePos, SurveillanceState, ranging

TEN_ACRE_RING_M = 100.0


class SurveillanceMode(Enum):
    UNCERTAINTY = "uncertainty"
    BELIEF_BASELINE = "belief_baseline"
    PERFECT = "perfect"
    OFF = "off"


@dataclass
class SurveillanceSetup:
    mode: SurveillanceMode = SurveillanceMode.UNCERTAINTY
    planner: SurveilPlannerConfig = field(default_factory=SurveilPlannerConfig)

    def __post_init__(self):
        # the planner's reward model follows the episode mode
        if self.mode is SurveillanceMode.UNCERTAINTY:
            self.planner.kind = SurveillanceModelKind.UNCERTAINTY
        elif self.mode is SurveillanceMode.BELIEF_BASELINE:
            self.planner.kind = SurveillanceModelKind.BELIEF_BASELINE


SUPPRESSION_POLICIES = ("localized", "global", "immediate", "technique", "off")


@dataclass
class SuppressionSetup:
    policy: str = "localized"
    planner: SuppressPlannerConfig = field(default_factory=SuppressPlannerConfig)

    def __post_init__(self):
        if self.policy not in SUPPRESSION_POLICIES:
            raise ValueError(f"unknown suppression policy '{self.policy}'")
        if self.policy in ("localized", "global", "immediate"):
            self.planner.reward_kind = self.policy
        if self.policy == "immediate":
            self.planner.mcts.max_depth = 1  # myopic by definition


@dataclass
class Timeline:
    uav_arrival: int = 5
    manned_arrival: int = 15
    horizon: int = 120
    timing: SuppressionTiming = field(default_factory=SuppressionTiming)

    @property
    def k(self) -> int:
        return self.timing.k

    def validate(self) -> None:
        if not (0 <= self.uav_arrival <= self.manned_arrival <= self.horizon):
            raise ValueError("need 0 <= uav_arrival <= manned_arrival <= horizon")

    def drop_minutes(self) -> list[int]:
        """Minutes at which the first aircraft's drops land."""
        return list(range(self.manned_arrival, self.horizon, self.k))


@dataclass
class DispatchPolicy:
    enabled: bool = False
    time_threshold: float = 30.0
    ring_threshold: float = TEN_ACRE_RING_M
    second_delay: int = 15  # minutes from trigger to the second aircraft's arrival


@dataclass
class RingHistory:
    samples: list[tuple[float, float]] = field(default_factory=list)

    def record(self, minute: float, radius_m: float) -> None:
        if self.samples and minute <= self.samples[-1][0]:
            raise ValueError("ring samples must have strictly increasing minutes")
        self.samples.append((minute, radius_m))

    def __len__(self) -> int:
        return len(self.samples)


class OutcomeClass(Enum):
    FULLY_SUPPRESSED = "fully_suppressed"
    CONTAINED = "contained"
    ESCAPED = "escaped"


def predict_ring(history: RingHistory, at_minute: float = 120.0) -> float:
    """Least-squares line over (minute, radius) evaluated at `at_minute`."""
    if len(history) < 2:
        raise InsufficientHistoryError(
            f"ring prediction needs at least 2 samples, have {len(history)}")
    t = np.array([m for m, _ in history.samples])
    r = np.array([rad for _, rad in history.samples])
    slope, intercept = np.polyfit(t, r, 1)
    return float(slope * at_minute + intercept)


def early_dispatch_decision(history: RingHistory, minute: float,
                            policy: DispatchPolicy) -> bool:
    """True when the episode is old enough and the ring forecast at the
    horizon exceeds the ring threshold. The caller latches the result."""
    if minute <= policy.time_threshold:
        return False
    if len(history) < 2:
        return False
    return predict_ring(history) > policy.ring_threshold


@dataclass
class LogRow:
    t: int
    burning_count: int
    destruction: float
    ring_radius_m: float
    drone1: DronePos | None = None
    drone2: DronePos | None = None
    drop_center: CellIndex | None = None
    drop_type: DropType | None = None
    dispatch_flag: bool = False


CSV_COLUMNS = ("t", "burning_count", "destruction", "ring_radius_m",
               "drone1_xyz", "drone2_xyz", "drop_center", "drop_type",
               "dispatch_flag", "outcome_at_end")


@dataclass
class EpisodeLog:
    rows: list[LogRow] = field(default_factory=list)
    outcome: OutcomeClass | None = None
    boundary_hit: bool = False
    spread_preset: str = "moderate"
    k: int = 5
    seed: int = 0
    dispatch_minute: int | None = None
    # end-state snapshots for analysis; not serialized to CSV
    final_belief: BeliefState | None = None
    final_burning: np.ndarray | None = None

    @property
    def final(self) -> LogRow:
        return self.rows[-1]

    def series(self, name: str) -> list[float]:
        return [getattr(row, name) for row in self.rows]

    def executed_drops(self) -> list[LogRow]:
        return [row for row in self.rows if row.drop_center is not None]

    def to_csv(self, path) -> None:
        outcome = self.outcome.value if self.outcome else ""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in self.rows:
                w.writerow([
                    row.t,
                    row.burning_count,
                    f"{row.destruction:.6f}",
                    f"{row.ring_radius_m:.6f}",
                    _fmt_drone(row.drone1),
                    _fmt_drone(row.drone2),
                    f"{row.drop_center.row}:{row.drop_center.col}" if row.drop_center else "",
                    row.drop_type.value if row.drop_type else "",
                    int(row.dispatch_flag),
                    outcome,
                ])

    @classmethod
    def from_csv(cls, path) -> "EpisodeLog":
        log = cls()
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected episode CSV header")
            outcome = ""
            for rec in reader:
                row = LogRow(
                    t=int(rec["t"]),
                    burning_count=int(rec["burning_count"]),
                    destruction=float(rec["destruction"]),
                    ring_radius_m=float(rec["ring_radius_m"]),
                    drone1=_parse_drone(rec["drone1_xyz"]),
                    drone2=_parse_drone(rec["drone2_xyz"]),
                    drop_center=_parse_cell(rec["drop_center"]),
                    drop_type=DropType(rec["drop_type"]) if rec["drop_type"] else None,
                    dispatch_flag=rec["dispatch_flag"] == "1",
                )
                log.rows.append(row)
                outcome = rec["outcome_at_end"]
        log.outcome = OutcomeClass(outcome) if outcome else None
        return log


def _fmt_drone(pos: DronePos | None) -> str:
    return f"{pos.x}:{pos.y}:{pos.z}" if pos is not None else ""


def _parse_drone(text: str) -> DronePos | None:
    if not text:
        return None
    x, y, z = (int(v) for v in text.split(":"))
    return DronePos(x, y, z)


def _parse_cell(text: str) -> CellIndex | None:
    if not text:
        return None
    r, c = (int(v) for v in text.split(":"))
    return CellIndex(r, c)


def classify_outcome(log: EpisodeLog) -> OutcomeClass:
    """Map a finished episode to fully_suppressed / contained / escaped.

    Contained means the final ring settled: within 10% of the mean of the
    last few suppression-step ring samples (3 for fast presets, 4 for the
    slower ones). Everything else that still burns has escaped.
    """
    final = log.final
    if final.burning_count == 0:
        return OutcomeClass.FULLY_SUPPRESSED
    if log.boundary_hit:
        return OutcomeClass.ESCAPED
    if final.ring_radius_m > TEN_ACRE_RING_M:
        return OutcomeClass.ESCAPED
    window = 3 if log.spread_preset in ("rapid", "ultrarapid") else 4
    samples = [row.ring_radius_m for row in log.rows
               if row.t % log.k == 0 and row.t < final.t]
    if len(samples) < window:
        return OutcomeClass.ESCAPED
    mean = sum(samples[-window:]) / window
    if mean <= 0.0:
        return OutcomeClass.CONTAINED if final.ring_radius_m <= 0.0 else OutcomeClass.ESCAPED
    if abs(final.ring_radius_m - mean) <= 0.10 * mean:
        return OutcomeClass.CONTAINED
    return OutcomeClass.ESCAPED


class _Aircraft:
    """Per-aircraft suppression bookkeeping: planning phase, drop phase,
    pending action, and (for the technique policy) wet-line memory."""

    def __init__(self, setup: SuppressionSetup, first_drop_minute: int, k: int,
                 rng: np.random.Generator):
        self.setup = setup
        self.first_drop = first_drop_minute
        self.k = k
        self.rng = rng
        self.pending: SuppressionActionSpec | None = None
        self.memory = TechniqueMemory()
        self.active = True

    def plans_at(self, t: int) -> bool:
        return t >= self.first_drop - 1 and (t - (self.first_drop - 1)) % self.k == 0

    def drops_at(self, t: int) -> bool:
        return t >= self.first_drop and (t - self.first_drop) % self.k == 0

    def plan(self, belief: BeliefState, scenario: Scenario,
             params: PropagationParams, minute: float) -> SuppressionActionSpec | None:
        if self.setup.policy == "technique":
            self.pending = firefighting_technique(belief, scenario, self.memory)
        else:
            self.pending = plan_suppression(belief, scenario, params,
                                            self.setup.planner, self.rng,
                                            minute=minute)
        return self.pending


def run_episode(scenario: Scenario, surveil_cfg: SurveillanceSetup,
                suppress_cfg: SuppressionSetup | None, dispatch: DispatchPolicy,
                seed: int, timeline: Timeline | None = None,
                params: PropagationParams | None = None) -> EpisodeLog:
    """Simulate one incident minute by minute and return the full log.

    Deterministic for a fixed seed when planner time limits are off. The
    world, observation, surveillance, and per-aircraft planner rng streams
    are spawned independently from the seed, so policy changes never perturb
    the world's randomness (paired-seed comparisons stay paired).
    """
    timeline = timeline or Timeline()
    timeline.validate()
    if params is None:
        from .presets import params_for_scenario
        params = params_for_scenario(scenario)

    streams = np.random.SeedSequence(seed).spawn(5)
    world_rng = np.random.default_rng(streams[0])
    obs_rng = np.random.default_rng(streams[1])
    surveil_rng = np.random.default_rng(streams[2])

    world = scenario.initial_world()
    belief = BeliefState.empty(world.shape)
    mode = surveil_cfg.mode
    drones: SurveillanceState | None = None

    suppression_on = suppress_cfg is not None and suppress_cfg.policy != "off"
    aircraft: list[_Aircraft] = []
    if suppression_on:
        aircraft.append(_Aircraft(suppress_cfg, timeline.manned_arrival,
                                  timeline.k, np.random.default_rng(streams[3])))
    offset = math.ceil(timeline.k / 2)
    second_rng = np.random.default_rng(streams[4])

    history = RingHistory()
    dispatched = False
    dispatch_minute: int | None = None
    second_join: int | None = None

    log = EpisodeLog(spread_preset=scenario.spread_preset, k=timeline.k, seed=seed)
    boundary = False
    # destruction accumulates: a cell's value is lost the moment it burns
    ever_burned = world.burning.copy()

    for t in range(timeline.horizon):
        if mode is SurveillanceMode.PERFECT:
            belief = BeliefState(world.burning.copy(),
                                 np.zeros(world.shape, dtype=np.float64))

        # second aircraft comes on station once dispatched and en route
        if (dispatched and second_join is not None and t >= second_join - 1
                and len(aircraft) == 1 and suppression_on):
            first_drop = second_join
            while (first_drop - (timeline.manned_arrival + offset)) % timeline.k != 0:
                first_drop += 1
            aircraft.append(_Aircraft(suppress_cfg, first_drop, timeline.k,
                                      second_rng))

        pending_now: SuppressionActionSpec | None = None
        for craft in aircraft:
            if craft.plans_at(t):
                action = craft.plan(belief, scenario, params, minute=t)
                if action is not None:
                    pending_now = action

        if mode in (SurveillanceMode.UNCERTAINTY, SurveillanceMode.BELIEF_BASELINE) \
                and t >= timeline.uav_arrival:
            if drones is None:
                drones = SurveillanceState(DronePos(0, 0, 1), DronePos(9, 9, 1))
            action = plan_surveillance(drones, belief, scenario, params,
                                       surveil_cfg.planner, surveil_rng,
                                       pending_drop=pending_now, minute=t)
            from .uav import apply_action
            drones = apply_action(drones, action)
            obs: ObservationBatch = ranging(drones, world.burning, obs_rng)
            belief = update_belief(belief, obs)
            belief = increment_uncertainty(belief, obs.cells())

        drop_center: CellIndex | None = None
        drop_type: DropType | None = None
        outcome_for_step = None
        for craft in aircraft:
            if craft.drops_at(t) and craft.pending is not None:
                action = craft.pending
                craft.pending = None
                outcome_for_step = footprint(action, size=world.shape[0])
                # suppression is assured on full-target cells; note it
                for r, c in outcome_for_step.full_cells:
                    belief.believed_burning[r, c] = False
                    belief.uncertainty[r, c] = 0.0
                drop_center = action.center
                drop_type = action.drop

        # ring samples exist only on the suppression time scale, which
        # starts when the manned aircraft is on station
        if t % timeline.k == 0 and t >= timeline.manned_arrival:
            history.record(t, ring_radius(belief.believed_burning, scenario.origin))
            if dispatch.enabled and not dispatched and len(history) >= 2:
                if early_dispatch_decision(history, t, dispatch):
                    dispatched = True
                    dispatch_minute = t
                    second_join = t + dispatch.second_delay

        log.rows.append(LogRow(
            t=t,
            burning_count=int(world.burning.sum()),
            destruction=instantaneous_destruction(ever_burned, scenario.resources),
            ring_radius_m=ring_radius(world.burning, scenario.origin),
            drone1=drones.drone1 if drones else None,
            drone2=drones.drone2 if drones else None,
            drop_center=drop_center,
            drop_type=drop_type,
            dispatch_flag=dispatched,
        ))

        world = step(world, outcome_for_step, params, scenario, world_rng)
        ever_burned |= world.burning
        edge = world.burning
        if edge[0, :].any() or edge[-1, :].any() or edge[:, 0].any() or edge[:, -1].any():
            boundary = True

        if boundary:
            break

    final_t = world.clock_t
    log.rows.append(LogRow(
        t=final_t,
        burning_count=int(world.burning.sum()),
        destruction=instantaneous_destruction(ever_burned, scenario.resources),
        ring_radius_m=ring_radius(world.burning, scenario.origin),
        drone1=drones.drone1 if drones else None,
        drone2=drones.drone2 if drones else None,
        dispatch_flag=dispatched,
    ))
    log.boundary_hit = boundary
    log.dispatch_minute = dispatch_minute
    log.final_belief = belief
    log.final_burning = world.burning.copy()
    log.outcome = classify_outcome(log)
    return log
