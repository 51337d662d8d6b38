"""End-to-end acceptance checks.

One test per shipped claim, each printing a single PASS/FAIL line (bypassing
capture) with the measured numbers and elapsed time. Budgets are enforced so
the suite stays runnable on a desktop.
"""

import math
import time

import numpy as np
import pytest
import scipy.stats

from fireline.drops import total_action_space
from fireline.episode import RingHistory, Timeline, predict_ring
from fireline.experiments import CampaignConfig, build_case, emit_report, \
    run_campaign, run_one
from fireline.grids import BeliefState, WindPhase
from fireline.mcts import MctsConfig
from fireline.presets import params_for_scenario
from fireline.propagation import PropagationParams, ignition_kernel, scenario_kernel, \
    step_grids
from fireline.suppress import SuppressPlannerConfig, asr, expected_action_values, \
    plan_suppression
from fireline.surveil import SurveilPlannerConfig, SurveillanceModelKind, \
    _SurveilModel, plan_surveillance
from fireline.uav import DronePos, Move, SurveillanceState, legal_actions


_CAPSYS = None


@pytest.fixture(autouse=True)
def _live_output(capsys):
    """Let each criterion print its verdict line through pytest's capture."""
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def _report(line: str) -> None:
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            print(line, flush=True)
    else:
        print(line, flush=True)


def _mid_episode_burning(i: int, preset: str = "moderate"):
    """Deterministic mid-episode snapshot: case-1 world stepped 20..48 minutes."""
    scenario = build_case(1, seed=i, spread_preset=preset)
    params = params_for_scenario(scenario)
    world = scenario.initial_world()
    rng = np.random.default_rng(np.random.SeedSequence([900, i]))
    steps = 20 + (i % 5) * 7
    burning, fuel = world.burning, world.fuel
    for t in range(steps):
        kernel = scenario_kernel(scenario, params, float(t))
        burning, fuel = step_grids(burning, fuel, kernel, params, rng)
    return scenario, params, burning, steps


def test_criterion_1_propagation_frequencies_and_fuel():
    t0 = time.perf_counter()
    params = PropagationParams()
    trials = 10_000

    center = np.zeros((3, 3), dtype=bool)
    center[1, 1] = True
    fuel = np.full((3, 3), 5, dtype=np.int64)

    wind = WindPhase(direction=0.9, strength=0.6)
    cols, rows = np.meshgrid(np.arange(3.0), np.arange(3.0))
    elevation = 0.4 * cols - 0.25 * rows

    worst_sigma = 0.0
    for phase, elev in ((None, np.zeros((3, 3))), (wind, elevation)):
        # analytic single-neighbor ignition probability for every border cell
        expected = np.ones((3, 3))
        for r in range(3):
            for c in range(3):
                if (r, c) == (1, 1):
                    continue
                dr, dc = 1 - r, 1 - c
                run = math.hypot(dr, dc)
                w = 0.0
                if phase is not None:
                    wr = -math.sin(phase.direction) * phase.strength
                    wc = math.cos(phase.direction) * phase.strength
                    w = wr * (-dr / run) + wc * (-dc / run)
                slope = (elev[r, c] - elev[1, 1]) / (run * 2.0)
                p = params.p0 * (1 + params.wind_bias * w) * (1 + params.slope_bias * slope)
                expected[r, c] = min(1.0, max(0.0, p))

        kernel = ignition_kernel(elev, phase, params)
        counts = np.zeros((3, 3))
        for k in range(trials):
            rng = np.random.default_rng(np.random.SeedSequence([4242, k]))
            nxt, _ = step_grids(center, fuel, kernel, params, rng)
            counts += nxt
        freq = counts / trials
        assert freq[1, 1] == 1.0  # burning cell persists while fuel remains
        for r in range(3):
            for c in range(3):
                if (r, c) == (1, 1):
                    continue
                se = math.sqrt(expected[r, c] * (1 - expected[r, c]) / trials)
                sigma = abs(freq[r, c] - expected[r, c]) / se
                worst_sigma = max(worst_sigma, sigma)
                assert sigma <= 3.0, (
                    f"cell {(r, c)}: freq {freq[r, c]:.4f} vs "
                    f"analytic {expected[r, c]:.4f} ({sigma:.1f} SE)")

    episodes = 1_000
    for ep in range(episodes):
        rng = np.random.default_rng(np.random.SeedSequence([515, ep]))
        fuel_e = rng.integers(0, 5, size=(12, 12))
        burning_e = rng.random((12, 12)) < 0.2
        phase = WindPhase(direction=float(rng.uniform(0, 2 * math.pi)),
                          strength=float(rng.uniform(0, 1)))
        elev_e = rng.normal(0.0, 1.0, size=(12, 12))
        kernel = ignition_kernel(elev_e, phase, params)
        for _ in range(25):
            nxt_burning, nxt_fuel = step_grids(burning_e, fuel_e, kernel, params, rng)
            assert (nxt_fuel >= 0).all()
            assert (nxt_fuel <= fuel_e).all()
            assert not (nxt_burning & (fuel_e <= 0)).any()
            burning_e, fuel_e = nxt_burning, nxt_fuel

    elapsed = time.perf_counter() - t0
    ok = elapsed < 60.0
    _report(f"criterion 1 (propagation Monte Carlo + fuel invariants): "
            f"{'PASS' if ok else 'FAIL'} — worst deviation {worst_sigma:.2f} SE over "
            f"2x{trials} trials, {episodes} fuel-safe episodes; {elapsed:.1f}s")
    assert ok, f"runtime {elapsed:.1f}s exceeds 60s budget"


def test_criterion_2_depth1_planner_matches_exhaustive_oracle():
    t0 = time.perf_counter()
    wanted = 20
    worst_sup = 1.0
    worst_sur = 1.0
    collected = 0
    for i in range(40):
        if collected >= wanted:
            break
        scenario, params, burning, minute = _mid_episode_burning(i)
        if burning.sum() == 0:
            continue
        collected += 1

        sup_cfg = SuppressPlannerConfig(
            reward_kind="localized", asr_method=2, quantile_q=90.0, rollout_ro=4,
            mcts=MctsConfig(discount=0.95, exploration_c=100.0, max_depth=1,
                            iteration_limit=10_000, time_limit_s=None))
        actions = asr(burning, scenario.origin, scenario.resources, 2, 90.0)
        assert 0 < len(actions) <= 100
        values = expected_action_values(burning, actions, scenario, params,
                                        sup_cfg, samples=60, root_seed=1000 + i)
        best = float(values.max())
        assert best > 0.0
        belief = BeliefState(burning.copy(), np.zeros_like(burning, dtype=np.float64))
        chosen = plan_suppression(belief, scenario, params, sup_cfg,
                                  np.random.default_rng(np.random.SeedSequence([2000, i])))
        ratio = float(values[actions.index(chosen)]) / best
        worst_sup = min(worst_sup, ratio)
        assert ratio >= 0.95, f"snapshot {i}: suppression ratio {ratio:.3f}"

        sur_cfg = SurveilPlannerConfig(
            kind=SurveillanceModelKind.UNCERTAINTY,
            mcts=MctsConfig(discount=0.95, exploration_c=100.0, max_depth=1,
                            iteration_limit=10_000, time_limit_s=None))
        unc = np.random.default_rng(np.random.SeedSequence([950, i])).random((100, 100))
        belief = BeliefState(burning.copy(), unc)
        state = SurveillanceState(DronePos(1 + (i % 4), 2, 1 + (i % 3)),
                                  DronePos(8 - (i % 4), 7, 1 + ((i + 1) % 3)))
        oracle = _SurveilModel(belief, scenario, params, sur_cfg, None,
                               np.random.default_rng(np.random.SeedSequence([3000, i])),
                               float(minute))
        root = oracle.initial_state(state, belief.uncertainty)
        joint = list(oracle.legal_actions(root))
        assert len(joint) <= 49
        vals = np.zeros(len(joint))
        for ai, a in enumerate(joint):
            rng_a = np.random.default_rng(np.random.SeedSequence([3100, i]))
            vals[ai] = sum(oracle.sample_transition(root, a, rng_a)[1]
                           for _ in range(200)) / 200.0
        best = float(vals.max())
        assert best > 0.0
        chosen = plan_surveillance(state, belief, scenario, params, sur_cfg,
                                   np.random.default_rng(np.random.SeedSequence([3000, i])),
                                   None, minute=float(minute))
        ratio = float(vals[joint.index(chosen)]) / best
        worst_sur = min(worst_sur, ratio)
        assert ratio >= 0.95, f"snapshot {i}: surveillance ratio {ratio:.3f}"

    elapsed = time.perf_counter() - t0
    ok = collected == wanted and elapsed < 600.0
    _report(f"criterion 2 (depth-1 planner vs exhaustive oracle): "
            f"{'PASS' if ok else 'FAIL'} — {collected} snapshots, worst ratios "
            f"suppression {worst_sup:.3f} / surveillance {worst_sur:.3f}; {elapsed:.0f}s")
    assert collected == wanted
    assert ok, f"runtime {elapsed:.0f}s exceeds 600s budget"


def test_criterion_3_destruction_minimization_beats_baselines():
    t0 = time.perf_counter()
    cfg = CampaignConfig(spread="moderate", perfect_info=True, iters=500,
                         time_limit_s=None)
    finals = {}
    for policy in ("localized", "global", "immediate", "technique"):
        finals[policy] = [run_one(1, policy, seed, cfg).final.destruction
                          for seed in range(20)]
    means = {p: float(np.mean(v)) for p, v in finals.items()}
    p_value = float(scipy.stats.ttest_ind(finals["localized"], finals["immediate"],
                                          equal_var=False).pvalue)
    elapsed = time.perf_counter() - t0

    directional = all(means[dm] < means[base]
                      for dm in ("localized", "global")
                      for base in ("immediate", "technique"))
    ok = directional and p_value < 0.05 and elapsed < 3600.0
    _report(f"criterion 3 (destruction minimization vs baselines): "
            f"{'PASS' if ok else 'FAIL'} — means localized {means['localized']:.0f}, "
            f"global {means['global']:.0f}, immediate {means['immediate']:.0f}, "
            f"technique {means['technique']:.0f}; Welch p {p_value:.4f}; {elapsed:.0f}s")
    assert directional, f"means not ordered: {means}"
    assert p_value < 0.05
    assert elapsed < 3600.0


def _burning_recall(log) -> float | None:
    truth = log.final_burning
    believed = log.final_belief.believed_burning
    total = int(truth.sum())
    if total == 0:
        return None
    return float((truth & believed).sum()) / total


def test_criterion_4_uncertainty_model_vs_belief_baseline():
    t0 = time.perf_counter()
    acc = {}
    for preset in ("rapid", "slow"):
        unc, base = [], []
        for seed in range(20):
            pair = []
            for surv in ("uncertainty", "belief_baseline"):
                cfg = CampaignConfig(spread=preset, surveillance=surv, iters=250,
                                     time_limit_s=None)
                pair.append(_burning_recall(run_one(1, "off", seed, cfg)))
            if None in pair:
                continue  # fire died; no burning cells to score
            unc.append(pair[0])
            base.append(pair[1])
        acc[preset] = (np.asarray(unc), np.asarray(base))

    unc_r, base_r = acc["rapid"]
    rapid_ok = unc_r.mean() >= base_r.mean()

    unc_s, base_s = acc["slow"]

    def ci(v):
        half = scipy.stats.t.ppf(0.975, len(v) - 1) * v.std(ddof=1) / math.sqrt(len(v))
        return v.mean() - half, v.mean() + half

    lo_u, hi_u = ci(unc_s)
    lo_b, hi_b = ci(base_s)
    slow_ok = (lo_b <= unc_s.mean() <= hi_b) and (lo_u <= base_s.mean() <= hi_u)

    elapsed = time.perf_counter() - t0
    ok = rapid_ok and slow_ok and elapsed < 1200.0
    _report(f"criterion 4 (surveillance accuracy, uncertainty vs baseline): "
            f"{'PASS' if ok else 'FAIL'} — rapid {unc_r.mean():.3f} vs {base_r.mean():.3f} "
            f"(n={len(unc_r)}); slow {unc_s.mean():.3f} [{lo_u:.3f},{hi_u:.3f}] vs "
            f"{base_s.mean():.3f} [{lo_b:.3f},{hi_b:.3f}] (n={len(unc_s)}); {elapsed:.0f}s")
    assert rapid_ok, "uncertainty model lost to the baseline on rapid spread"
    assert slow_ok, "slow-preset means are not within each other's 95% CIs"
    assert elapsed < 1200.0


def test_criterion_5_ring_forecast_within_ten_percent():
    t0 = time.perf_counter()
    cfg = CampaignConfig(spread="moderate", perfect_info=True)
    passing = usable = 0
    for seed in range(20):
        log = run_one(1, "off", seed, cfg)
        rings = {row.t: row.ring_radius_m for row in log.rows}
        horizon = max(rings)
        if horizon < 120 or rings[horizon] == 0.0:
            continue  # boundary exit or dead fire: no realized t=120 value
        usable += 1
        realized = rings[horizon]
        good = True
        for m in range(30, 116, 5):
            hist = RingHistory()
            for t in range(15, m + 1, 5):
                hist.record(t, rings[t])
            if abs(predict_ring(hist, 120.0) - realized) > 0.10 * realized:
                good = False
                break
        passing += good

    elapsed = time.perf_counter() - t0
    ok = usable > 0 and passing >= math.ceil(0.8 * usable) and elapsed < 300.0
    _report(f"criterion 5 (ring forecast within 10% from minute 30 on): "
            f"{'PASS' if ok else 'FAIL'} — {passing}/{usable} seeds; {elapsed:.0f}s")
    assert ok, f"only {passing}/{usable} seeds forecast within 10%"


def test_criterion_6_structural_counts():
    t0 = time.perf_counter()
    assert len(Move) == 7
    joint = legal_actions(SurveillanceState(DronePos(2, 2, 3), DronePos(7, 7, 3)))
    assert len(joint) == 49
    assert total_action_space() == 50_000
    minutes = Timeline().drop_minutes()
    assert len(minutes) == 21
    assert minutes == list(range(15, 120, 5))

    burning = np.zeros((100, 100), dtype=bool)
    burning[40:50, 30:50] = True  # 200-cell fire
    assert int(burning.sum()) == 200
    scenario = build_case(1, seed=0, spread_preset="moderate")
    restricted = asr(burning, scenario.origin, scenario.resources, 2, 90.0)
    reduction = 1.0 - len(restricted) / total_action_space()
    assert len(restricted) > 0
    assert reduction >= 0.99

    elapsed = time.perf_counter() - t0
    _report(f"criterion 6 (structural counts): PASS — 7 moves, 49 joint actions, "
            f"50000 drops, 21 slots, ASR keeps {len(restricted)} of 50000 "
            f"({reduction:.4%} cut); {elapsed:.1f}s")


def test_criterion_7_byte_identical_episode_and_campaign(tmp_path):
    t0 = time.perf_counter()
    ep_cfg = CampaignConfig(spread="slow", surveillance="uncertainty", dispatch=True,
                            iters=40, time_limit_s=None)
    paths = []
    for run in range(2):
        log = run_one(1, "localized", 7, ep_cfg)
        path = tmp_path / f"episode{run}.csv"
        log.to_csv(path)
        paths.append(path)
    episode_ok = paths[0].read_bytes() == paths[1].read_bytes()

    camp_cfg = CampaignConfig(spread="slow", perfect_info=True, iters=50,
                              time_limit_s=None)
    trees = []
    for run in range(2):
        out = tmp_path / f"campaign{run}"
        report = run_campaign(1, ["localized", "immediate"], 2, 11, camp_cfg,
                              out_dir=out)
        for fmt in ("csv", "text", "svg"):
            emit_report(report, fmt, out / "report")
        trees.append({p.relative_to(out): p.read_bytes()
                      for p in sorted(out.rglob("*")) if p.is_file()})
    campaign_ok = trees[0] == trees[1] and len(trees[0]) > 0

    elapsed = time.perf_counter() - t0
    ok = episode_ok and campaign_ok
    _report(f"criterion 7 (byte-identical reruns): {'PASS' if ok else 'FAIL'} — "
            f"episode CSVs match, {len(trees[0])} campaign files match; {elapsed:.0f}s")
    assert episode_ok, "episode CSVs differ between identical runs"
    assert campaign_ok, "campaign trees differ between identical runs"
