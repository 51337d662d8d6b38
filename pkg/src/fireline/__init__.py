"""Wildfire initial-attack simulation and planning toolkit.

A 100x100 stochastic fire grid, drone surveillance that maintains a shared
belief and uncertainty map, water-drop suppression planned by Monte Carlo
tree search over restricted action spaces, full minute-scale episodes with
early dispatch of a second aircraft, and a seeded experiment harness."""

from .drops import DROP_TYPES, DropType, FootprintTemplate, \
    SuppressionActionSpec, SuppressionTiming, axis_of_advance, \
    apply_suppression, drop_cadence, footprint, load_templates, \
    save_templates, total_action_space
from .episode import DispatchPolicy, EpisodeLog, OutcomeClass, RingHistory, \
    SurveillanceMode, SurveillanceSetup, SuppressionSetup, Timeline, \
    classify_outcome, early_dispatch_decision, predict_ring, run_episode
from .errors import CalibrationError, ConfigError, FirelineError, \
    InsufficientHistoryError, ScenarioFormatError
from .experiments import AggregateReport, CampaignConfig, CaseDefinition, \
    build_case, calibrate_spread, emit_report, load_campaign, run_campaign, \
    run_one
from .grids import BeliefState, CellIndex, GRID_SIZE, ObservationBatch, \
    Scenario, WindPhase, WorldState, box_count, increment_uncertainty, \
    instantaneous_destruction, ring_radius, update_belief
from .mcts import GenerativeModel, MctsConfig, depth_schedule, search, \
    search_parallel, uct_score
from .presets import SPREAD_PRESETS, load_preset_table, params_for_scenario, \
    preset_p0
from .propagation import PropagationParams, ignition_probability, \
    neighbor_ignition_prob, propagate_internal, step
from .scenario_io import load_scenario, save_scenario
from .suppress import SuppressPlannerConfig, TechniqueMemory, asr, \
    expected_action_values, fire_head, firefighting_technique, \
    global_penalty, localized_reward, plan_suppression
from .surveil import SurveilPlannerConfig, SurveillanceModelKind, \
    belief_baseline_reward, plan_surveillance
from .uav import DronePos, JOINT_ACTIONS, Move, PenaltyParams, \
    SurveillanceAction, SurveillanceState, apply_action, legal_actions, \
    ranging, surveillance_reward

__version__ = "0.1.0"
