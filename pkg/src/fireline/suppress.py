"""Suppression planning: which drop, where, and the rule-based baselines.

The search space is first cut down by an action space restriction (ASR):

* method 1: center drops on believed-burning cells only;
* method 2: keep only the centers at or beyond the Q-th percentile of
  distance from the fire origin (the growing edge);
* method 3: further keep only centers inside two 60-degree arcs, one toward
  the most valuable resource area and one toward the fire head.

Each method falls back to the next less restrictive one when empty. MCTS
then ranks the surviving drop actions under one of three reward models:
localized destruction difference, global destruction penalty, or the
myopic count of believed-burning cells a drop clears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .drops import DROP_TYPES, LINE_CORE_LENGTH, DropType, \
    SuppressionActionSpec, apply_suppression, footprint
from .grids import GRID_SIZE, BeliefState, CellIndex, Scenario, \
    instantaneous_destruction
from .mcts import MctsConfig, search
from .propagation import PropagationParams, active_window, propagate_internal

REWARD_KINDS = ("localized", "global", "immediate")


@dataclass
class SuppressPlannerConfig:
    reward_kind: str = "localized"
    asr_method: int = 2
    quantile_q: float = 90.0
    rollout_ro: int = 10
    mcts: MctsConfig = field(default_factory=lambda: MctsConfig(
        discount=0.95, exploration_c=100.0, max_depth=2, iteration_limit=1000,
        time_limit_s=None))

    def validate(self) -> None:
        if self.reward_kind not in REWARD_KINDS:
            raise ValueError(f"unknown reward kind '{self.reward_kind}'")
        if self.asr_method not in (1, 2, 3):
            raise ValueError("asr_method must be 1, 2, or 3")
        if not (0.0 < self.quantile_q < 100.0):
            raise ValueError("quantile_q must lie in (0, 100)")
        if self.rollout_ro < 0:
            raise ValueError("rollout_ro must be non-negative")


@dataclass(frozen=True)
class LocalWindow:
    """Square evaluation window around a drop center."""

    center: CellIndex
    half_width: int

    def slices(self, size: int) -> tuple[slice, slice]:
        r, c = self.center
        return (slice(max(0, r - self.half_width), min(size, r + self.half_width + 1)),
                slice(max(0, c - self.half_width), min(size, c + self.half_width + 1)))


def fire_head(burning: np.ndarray, origin: CellIndex) -> CellIndex | None:
    """Centroid of the top-decile most distant burning cells, snapped to the
    grid. None when nothing burns."""
    rows, cols = np.nonzero(burning)
    if rows.size == 0:
        return None
    d = np.hypot(rows - origin.row, cols - origin.col)
    cut = np.percentile(d, 90.0)
    keep = d >= cut
    return CellIndex(int(round(rows[keep].mean())), int(round(cols[keep].mean())))


def _arc_mask(rows: np.ndarray, cols: np.ndarray, origin: CellIndex,
              target: tuple[float, float], half_angle_rad: float) -> np.ndarray:
    tr = target[0] - origin.row
    tc = target[1] - origin.col
    norm = math.hypot(tr, tc)
    if norm < 1e-9:
        return np.ones(rows.shape, dtype=bool)
    vr = rows - origin.row
    vc = cols - origin.col
    vnorm = np.hypot(vr, vc)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = (vr * tr + vc * tc) / (vnorm * norm)
    out = cosang >= math.cos(half_angle_rad)
    out[vnorm < 1e-9] = True  # the origin cell itself is direction-free
    return out


def richest_area_center(resources: np.ndarray) -> tuple[float, float] | None:
    """Centroid of the connected resource region with the largest total
    value; None when the grid holds no resources."""
    labels, count = ndimage.label(resources > 0)
    if count == 0:
        return None
    sums = ndimage.sum_labels(resources, labels, index=range(1, count + 1))
    best = int(np.argmax(sums)) + 1
    rows, cols = np.nonzero(labels == best)
    return (float(rows.mean()), float(cols.mean()))


def asr(burning: np.ndarray, origin: CellIndex, resources: np.ndarray,
        method: int = 2, quantile_q: float = 90.0) -> list[SuppressionActionSpec]:
    """Drop actions worth searching, with fallback to less restrictive
    methods when a cut empties the set. Deterministic ordering: centers in
    row-major order, drop types in declaration order."""
    rows, cols = np.nonzero(burning)
    if rows.size == 0:
        return []

    def actions_for(r_sel: np.ndarray, c_sel: np.ndarray) -> list[SuppressionActionSpec]:
        return [SuppressionActionSpec(CellIndex(int(r), int(c)), drop)
                for r, c in zip(r_sel, c_sel) for drop in DROP_TYPES]

    if method == 1:
        return actions_for(rows, cols)

    d = np.hypot(rows - origin.row, cols - origin.col)
    cut = np.percentile(d, quantile_q)
    edge = d >= cut
    if method == 2:
        if not edge.any():
            return actions_for(rows, cols)
        return actions_for(rows[edge], cols[edge])

    keep = edge.copy()
    arcs = np.zeros(rows.shape, dtype=bool)
    rich = richest_area_center(resources)
    if rich is not None:
        arcs |= _arc_mask(rows, cols, origin, rich, math.radians(30.0))
    head = fire_head(burning, origin)
    if head is not None:
        arcs |= _arc_mask(rows, cols, origin, (float(head.row), float(head.col)),
                          math.radians(30.0))
    keep &= arcs
    if keep.any():
        return actions_for(rows[keep], cols[keep])
    if edge.any():
        return actions_for(rows[edge], cols[edge])
    return actions_for(rows, cols)


def _paired_rollouts(belief: np.ndarray, suppressed: np.ndarray, ro: int,
                     scenario: Scenario, params: PropagationParams,
                     seed: int, minute: float) -> tuple[np.ndarray, np.ndarray]:
    """Advance reference and suppressed maps under common random numbers.

    Both rollouts share one window (from the pre-suppression map), so their
    per-cell draws line up and a drop that changes nothing scores exactly 0.
    """
    window = active_window(belief, ro)
    ref = propagate_internal(belief, ro, scenario, params,
                             np.random.default_rng(seed), minute=minute,
                             window=window)
    sup = propagate_internal(suppressed, ro, scenario, params,
                             np.random.default_rng(seed), minute=minute,
                             window=window)
    return ref, sup


def localized_reward(belief: np.ndarray, action: SuppressionActionSpec,
                     scenario: Scenario, params: PropagationParams,
                     rollout_ro: int, rng: np.random.Generator,
                     minute: float = 0.0) -> float:
    """Destruction avoided inside the drop's local window: reference rollout
    minus suppressed rollout, both RO steps ahead with shared seeds."""
    seed = int(rng.integers(0, 2 ** 63))
    sup0, _, _ = apply_suppression(belief, None, action, params, rng)
    ref, sup = _paired_rollouts(belief, sup0, rollout_ro, scenario, params,
                                seed, minute)
    win = LocalWindow(action.center, max(1, rollout_ro))
    rs, cs = win.slices(belief.shape[0])
    res = scenario.resources[rs, cs]
    return (instantaneous_destruction(ref[rs, cs], res)
            - instantaneous_destruction(sup[rs, cs], res))


def global_penalty(belief: np.ndarray, action: SuppressionActionSpec,
                   scenario: Scenario, params: PropagationParams,
                   rollout_ro: int, rng: np.random.Generator,
                   minute: float = 0.0) -> float:
    """Whole-grid destruction after suppressing then advancing RO steps.
    Smaller is better."""
    sup0, _, _ = apply_suppression(belief, None, action, params, rng)
    sup = propagate_internal(sup0, rollout_ro, scenario, params, rng,
                             minute=minute,
                             window=active_window(belief, rollout_ro))
    return instantaneous_destruction(sup, scenario.resources)


class _SuppressModel:
    """Generative model over (belief grid, depth).

    The action set is fixed at the root ASR; between depths the belief
    advances RO internal steps. Successor grids are skipped at the horizon
    when the reward does not need them.
    """

    def __init__(self, actions: list[SuppressionActionSpec], scenario: Scenario,
                 params: PropagationParams, cfg: SuppressPlannerConfig,
                 minute: float):
        self.actions = actions
        self.scenario = scenario
        self.params = params
        self.cfg = cfg
        self.minute = minute

    def legal_actions(self, state):
        return self.actions

    def is_terminal(self, state) -> bool:
        b = state[0]
        return b is None or not b.any()

    def sample_transition(self, state, action: SuppressionActionSpec,
                          rng: np.random.Generator):
        b, depth = state
        cfg = self.cfg
        d2 = depth + 1
        at_horizon = d2 >= cfg.mcts.max_depth
        # one fixed draw before the footprint-dependent ones, so per-sample
        # generators stay in lockstep across actions (common random numbers)
        rollout_seed = int(rng.integers(0, 2 ** 63))
        sup0, _, _ = apply_suppression(b, None, action, self.params, rng)
        minute = self.minute + depth * cfg.rollout_ro

        if cfg.reward_kind == "immediate":
            reward = float(b.sum() - sup0.sum())
            nxt = None if at_horizon else propagate_internal(
                sup0, cfg.rollout_ro, self.scenario, self.params,
                np.random.default_rng(rollout_seed), minute=minute,
                window=active_window(b, cfg.rollout_ro))
        elif cfg.reward_kind == "localized":
            ref, sup = _paired_rollouts(b, sup0, cfg.rollout_ro, self.scenario,
                                        self.params, rollout_seed, minute)
            win = LocalWindow(action.center, max(1, cfg.rollout_ro))
            rs, cs = win.slices(b.shape[0])
            res = self.scenario.resources[rs, cs]
            reward = (instantaneous_destruction(ref[rs, cs], res)
                      - instantaneous_destruction(sup[rs, cs], res))
            nxt = sup
        else:  # global
            sup = propagate_internal(sup0, cfg.rollout_ro, self.scenario,
                                     self.params,
                                     np.random.default_rng(rollout_seed),
                                     minute=minute,
                                     window=active_window(b, cfg.rollout_ro))
            reward = -instantaneous_destruction(sup, self.scenario.resources)
            nxt = sup
        return (nxt, d2), reward


def plan_suppression(belief: BeliefState, scenario: Scenario,
                     params: PropagationParams, cfg: SuppressPlannerConfig,
                     rng: np.random.Generator,
                     minute: float = 0.0) -> SuppressionActionSpec | None:
    """Recommend the next drop, or None when nothing is believed burning."""
    cfg.validate()
    actions = asr(belief.believed_burning, scenario.origin, scenario.resources,
                  cfg.asr_method, cfg.quantile_q)
    if not actions:
        return None
    model = _SuppressModel(actions, scenario, params, cfg, minute)
    return search(model, (belief.believed_burning, 0), cfg.mcts, rng)


def expected_action_values(belief: np.ndarray,
                           actions: list[SuppressionActionSpec],
                           scenario: Scenario, params: PropagationParams,
                           cfg: SuppressPlannerConfig, samples: int,
                           root_seed: int, minute: float = 0.0) -> np.ndarray:
    """Exhaustive depth-1 evaluation: mean reward per action over `samples`
    draws. Sample seeds derive from (root_seed, sample index) and are shared
    across actions, so comparisons ride on common random numbers and the
    result is independent of evaluation order."""
    model = _SuppressModel(actions, scenario, params, cfg, minute)
    seeds = [np.random.SeedSequence([root_seed, si]) for si in range(samples)]
    out = np.zeros(len(actions))
    for ai, action in enumerate(actions):
        total = 0.0
        for si in range(samples):
            _, r = model.sample_transition((belief, 0), action,
                                           np.random.default_rng(seeds[si]))
            total += r
        out[ai] = total / samples
    return out


@dataclass
class TechniqueMemory:
    """Wet-line progress for the rule-based firefighting policy.

    Segment queues are laid out once, on the first planning call that sees a
    believed fire, and then consumed drop by drop; completed areas are never
    revisited even if the fire later shifts.
    """

    queues: dict[int, list[SuppressionActionSpec]] | None = None
    centroids: dict[int, tuple[float, float]] = field(default_factory=dict)


def resources_uneven(resources: np.ndarray) -> bool:
    """True when resource values vary strongly: coefficient of variation of
    the positive cell values exceeds 0.5."""
    vals = resources[resources > 0.0]
    if vals.size == 0:
        return False
    mean = float(vals.mean())
    if mean <= 0.0:
        return False
    return float(vals.std()) / mean > 0.5


def wet_line_segments(area_mask: np.ndarray,
                      fire_centroid: tuple[float, float],
                      size: int = GRID_SIZE) -> list[SuppressionActionSpec]:
    """Line drops forming a protective ring one cell outside the area's
    bounding box. Sides are covered by straight-line segments (EW along the
    top and bottom, NS along the left and right), the side facing the fire
    first."""
    rows, cols = np.nonzero(area_mask)
    if rows.size == 0:
        return []
    r0, r1 = int(rows.min()), int(rows.max())
    c0, c1 = int(cols.min()), int(cols.max())
    # side spans, one cell outside the box; top/bottom include the corners
    sides = [
        ("top", r0 - 1, c0 - 1, c1 + 1, DropType.LINE_EW),
        ("bottom", r1 + 1, c0 - 1, c1 + 1, DropType.LINE_EW),
        ("left", c0 - 1, r0, r1, DropType.LINE_NS),
        ("right", c1 + 1, r0, r1, DropType.LINE_NS),
    ]
    fr, fc = fire_centroid

    def side_distance(side) -> float:
        name, fixed, lo, hi, drop = side
        mid = (lo + hi) / 2.0
        if drop is DropType.LINE_EW:
            return math.hypot(fixed - fr, mid - fc)
        return math.hypot(mid - fr, fixed - fc)

    order = sorted(range(4), key=lambda i: (side_distance(sides[i]), i))
    segments: list[SuppressionActionSpec] = []
    for i in order:
        name, fixed, lo, hi, drop = sides[i]
        length = hi - lo + 1
        count = max(1, math.ceil(length / LINE_CORE_LENGTH))
        for j in range(count):
            a = lo + j * LINE_CORE_LENGTH
            b = min(lo + (j + 1) * LINE_CORE_LENGTH, hi + 1) - 1
            mid = (a + b) // 2
            if drop is DropType.LINE_EW:
                center = CellIndex(fixed, mid)
            else:
                center = CellIndex(mid, fixed)
            row = min(max(center.row, 0), size - 1)
            col = min(max(center.col, 0), size - 1)
            segments.append(SuppressionActionSpec(CellIndex(row, col), drop))
    return segments


def _head_attack(belief_burning: np.ndarray,
                 origin: CellIndex) -> SuppressionActionSpec | None:
    head = fire_head(belief_burning, origin)
    if head is None:
        return None
    hr, hc = head.row - origin.row, head.col - origin.col
    norm = math.hypot(hr, hc)
    line_dirs = {
        DropType.LINE_NS: (1.0, 0.0),
        DropType.LINE_EW: (0.0, 1.0),
        DropType.LINE_NE_SW: (1.0 / math.sqrt(2), -1.0 / math.sqrt(2)),
        DropType.LINE_NW_SE: (1.0 / math.sqrt(2), 1.0 / math.sqrt(2)),
    }
    if norm == 0.0:
        return SuppressionActionSpec(head, DropType.LINE_EW)
    best = None
    best_cos = None
    for drop in DROP_TYPES:
        if drop not in line_dirs:
            continue
        dr, dc = line_dirs[drop]
        cos = abs((dr * hr + dc * hc) / norm)
        if best_cos is None or cos < best_cos - 1e-12:
            best, best_cos = drop, cos
    return SuppressionActionSpec(head, best)


def firefighting_technique(belief: BeliefState, scenario: Scenario,
                           state: TechniqueMemory) -> SuppressionActionSpec | None:
    """Rule-based baseline: lay wet-lines around resource areas nearest the
    fire while resources are unevenly distributed, then attack the fire head
    with the line orientation most nearly perpendicular to the origin-to-head
    direction. Returns None when nothing is believed burning."""
    burning = belief.believed_burning
    if not burning.any():
        return None
    rows, cols = np.nonzero(burning)
    fire_centroid = (float(rows.mean()), float(cols.mean()))

    if resources_uneven(scenario.resources):
        if state.queues is None:
            state.queues = {}
            labels, count = ndimage.label(scenario.resources > 0.0,
                                          structure=np.ones((3, 3), dtype=int))
            for area_id in range(1, count + 1):
                mask = labels == area_id
                state.queues[area_id] = wet_line_segments(mask, fire_centroid,
                                                          burning.shape[0])
                ar, ac = np.nonzero(mask)
                state.centroids[area_id] = (float(ar.mean()), float(ac.mean()))
        open_areas = [aid for aid, q in state.queues.items() if q]
        if open_areas:
            fr, fc = fire_centroid
            nearest = min(open_areas, key=lambda aid: (
                math.hypot(state.centroids[aid][0] - fr,
                           state.centroids[aid][1] - fc), aid))
            return state.queues[nearest].pop(0)

    return _head_attack(burning, scenario.origin)
