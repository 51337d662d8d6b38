"""Surveillance planning: where should the two drones look next.

The planner searches the joint drone action space with MCTS against an
internal copy of the believed fire. Two reward models are available:

* uncertainty: pays the uncertainty mass of whatever is observed. This is
  the main model; it drives drones toward poorly known fire edges.
* belief_baseline: pays the number of observed cells whose simulated value
  disagrees with the pre-step belief (a change-detection baseline).

Both share the stacking / approach-corridor / origin-leash penalties.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .drops import SuppressionActionSpec, axis_of_advance
from .grids import BeliefState, ObservationBatch, Scenario, box_count, \
    UNCERTAINTY_NEIGHBORHOOD, UNCERTAINTY_RADIUS
from .mcts import MctsConfig, search
from .propagation import PropagationParams, propagate_internal
from .uav import PenaltyParams, SurveillanceAction, SurveillanceState, \
    apply_action, drones_too_close, legal_actions, near_axis, \
    origin_distance_m, ranging_cells


class SurveillanceModelKind(Enum):
    UNCERTAINTY = "uncertainty"
    BELIEF_BASELINE = "belief_baseline"


@dataclass
class SurveilPlannerConfig:
    kind: SurveillanceModelKind = SurveillanceModelKind.UNCERTAINTY
    penalties: PenaltyParams = field(default_factory=PenaltyParams)
    mcts: MctsConfig = field(default_factory=lambda: MctsConfig(
        discount=0.95, exploration_c=100.0, max_depth=3, iteration_limit=1000,
        time_limit_s=None))


def belief_baseline_reward(obs: ObservationBatch, prior_belief: np.ndarray,
                           tau1: float = 1.0) -> float:
    """Count of observed cells disagreeing with the prior belief, scaled."""
    seen = obs.collapsed()
    return tau1 * sum(1 for cell, val in seen.items()
                      if bool(prior_belief[cell.row, cell.col]) != val)


class _SurveilModel:
    """Generative model over (drone state, depth, uncertainty map).

    One internal belief trajectory is sampled per planning call and shared
    across tree iterations; per-iteration randomness is the ranging
    subsample. Uncertainty maps ride along the walked path, never in nodes.
    """

    def __init__(self, belief: BeliefState, scenario: Scenario,
                 params: PropagationParams, cfg: SurveilPlannerConfig,
                 pending_drop: SuppressionActionSpec | None,
                 rng: np.random.Generator, minute: float):
        self.cfg = cfg
        self.size = belief.believed_burning.shape[0]
        self.origin = scenario.origin
        self.aoa = None
        if pending_drop is not None:
            self.aoa = axis_of_advance(pending_drop, scenario.water_source)
        depth = cfg.mcts.max_depth
        self.beliefs = [belief.believed_burning]
        for d in range(depth):
            self.beliefs.append(propagate_internal(
                self.beliefs[-1], 1, scenario, params, rng, minute=minute + d))
        self.flat_beliefs = [b.ravel() for b in self.beliefs]
        # uncertainty growth applied on entering each depth
        self.growth = [None]
        for d in range(1, depth + 1):
            counts = box_count(self.beliefs[d], UNCERTAINTY_RADIUS) \
                - self.beliefs[d].astype(np.int64)
            self.growth.append(counts / float(UNCERTAINTY_NEIGHBORHOOD))

    def initial_state(self, s: SurveillanceState, uncertainty: np.ndarray):
        return (s, 0, uncertainty)

    def legal_actions(self, state):
        return legal_actions(state[0])

    def is_terminal(self, state) -> bool:
        return False

    def _penalties(self, s: SurveillanceState) -> float:
        p = self.cfg.penalties
        out = p.tau4 * origin_distance_m(s, self.origin)
        if drones_too_close(s, p):
            out += p.tau2
        if self.aoa is not None and near_axis(s, self.aoa, p):
            out += p.tau3
        return out

    def sample_transition(self, state, action: SurveillanceAction,
                          rng: np.random.Generator):
        s, depth, unc = state
        s2 = apply_action(s, action)
        d2 = depth + 1
        idx = np.concatenate([
            ranging_cells(s2.drone1, self.size, rng),
            ranging_cells(s2.drone2, self.size, rng),
        ])
        idx = np.unique(idx)
        p = self.cfg.penalties
        if self.cfg.kind is SurveillanceModelKind.UNCERTAINTY:
            gain = p.tau1 * float(unc.ravel()[idx].sum())
        else:
            changed = self.flat_beliefs[d2][idx] != self.flat_beliefs[d2 - 1][idx]
            gain = p.tau1 * float(changed.sum())
        reward = gain - self._penalties(s2)

        if d2 >= self.cfg.mcts.max_depth:
            unc2 = unc  # successor map unused at the horizon
        else:
            unc2 = np.minimum(1.0, unc + self.growth[d2])
            unc2.ravel()[idx] = 0.0
        return (s2, d2, unc2), reward


def plan_surveillance(state: SurveillanceState, belief: BeliefState,
                      scenario: Scenario, params: PropagationParams,
                      cfg: SurveilPlannerConfig, rng: np.random.Generator,
                      pending_drop: SuppressionActionSpec | None = None,
                      minute: float = 0.0) -> SurveillanceAction:
    """Pick the next joint drone move from the current belief.

    A pending suppression action, when given, activates the approach-corridor
    penalty around its axis of advance. Fresh search tree per call;
    deterministic for a fixed rng state and iteration budget.
    """
    model = _SurveilModel(belief, scenario, params, cfg, pending_drop, rng, minute)
    root = model.initial_state(state, belief.uncertainty)
    return search(model, root, cfg.mcts, rng)
