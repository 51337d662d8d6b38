import numpy as np

from fireline.grids import BeliefState, CellIndex, ObservationBatch
from fireline.drops import DropType, SuppressionActionSpec, axis_of_advance
from fireline.uav import (
    AIR_XY,
    AIR_Z_MAX,
    AIR_Z_MIN,
    JOINT_ACTIONS,
    RANGING_CAP,
    DronePos,
    Move,
    PenaltyParams,
    SurveillanceAction,
    SurveillanceState,
    apply_action,
    in_airspace,
    legal_actions,
    ranging,
    surveillance_reward,
)


def mid_state():
    return SurveillanceState(DronePos(2, 2, 4), DronePos(7, 7, 4))


def test_joint_action_space_is_49():
    assert len(JOINT_ACTIONS) == 49


def test_all_actions_legal_mid_airspace():
    assert len(legal_actions(mid_state())) == 49


def test_corner_max_altitude_prunes_moves():
    # drone1 boxed into a ceiling corner: 2 lateral moves, descend, hover
    s = SurveillanceState(DronePos(0, 0, AIR_Z_MAX), DronePos(5, 5, 4))
    acts = legal_actions(s)
    moves1 = {a.move1 for a in acts}
    assert len(moves1) == 4
    assert Move.HOVER in moves1 and Move.DESCEND in moves1
    assert len(acts) <= 28


def test_adjacent_drones_cannot_collide():
    s = SurveillanceState(DronePos(4, 4, 3), DronePos(4, 6, 3))
    for a in legal_actions(s):
        n = apply_action(s, a)
        assert n.drone1 != n.drone2


def test_apply_action_hover_identity():
    s = mid_state()
    out = apply_action(s, SurveillanceAction(Move.HOVER, Move.HOVER))
    assert out == s


def test_apply_action_ascend():
    s = SurveillanceState(DronePos(2, 2, 3), DronePos(7, 7, 3))
    out = apply_action(s, SurveillanceAction(Move.ASCEND, Move.HOVER))
    assert out.drone1 == DronePos(2, 2, 4)
    assert out.drone2 == DronePos(7, 7, 3)


def test_apply_action_opposite_lateral_moves():
    s = SurveillanceState(DronePos(3, 2, 3), DronePos(6, 7, 3))
    out = apply_action(s, SurveillanceAction(Move.LEFT, Move.RIGHT))
    assert out.drone1.x == s.drone1.x - 1
    assert out.drone2.x == s.drone2.x + 1


def test_legal_actions_never_leave_airspace():
    corners = [DronePos(0, 0, AIR_Z_MIN), DronePos(AIR_XY - 1, AIR_XY - 1, AIR_Z_MAX)]
    for pos in corners:
        s = SurveillanceState(pos, DronePos(5, 5, 4))
        for a in legal_actions(s):
            n = apply_action(s, a)
            assert in_airspace(n.drone1) and in_airspace(n.drone2)


def test_ranging_low_altitude_sees_whole_footprint():
    # side 10*z = 10 cells -> 100 cells, exactly the cap, all observed
    burning = np.zeros((100, 100), dtype=bool)
    s = SurveillanceState(DronePos(5, 5, 1), DronePos(0, 0, 1))
    obs = ranging(s, burning, np.random.default_rng(0))
    d1_cells = {c for c, _ in obs.entries[:100]}
    assert len(d1_cells) == 100


def test_ranging_high_altitude_subsamples_to_cap():
    burning = np.zeros((100, 100), dtype=bool)
    s = SurveillanceState(DronePos(5, 5, 7), DronePos(0, 0, 7))
    obs = ranging(s, burning, np.random.default_rng(0))
    assert len(obs) == 2 * RANGING_CAP


def test_ranging_batch_never_exceeds_two_caps():
    burning = np.zeros((100, 100), dtype=bool)
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = SurveillanceState(
            DronePos(int(rng.integers(10)), int(rng.integers(10)), int(rng.integers(1, 8))),
            DronePos(int(rng.integers(10)), int(rng.integers(10)), int(rng.integers(1, 8))))
        assert len(ranging(s, burning, rng)) <= 2 * RANGING_CAP


def test_ranging_corner_footprint_clipped():
    burning = np.zeros((100, 100), dtype=bool)
    s = SurveillanceState(DronePos(0, 0, 3), DronePos(9, 9, 1))
    obs = ranging(s, burning, np.random.default_rng(0))
    for cell, _ in obs.entries:
        assert 0 <= cell.row < 100 and 0 <= cell.col < 100


def test_ranging_reads_truth():
    burning = np.zeros((100, 100), dtype=bool)
    burning[50:60, 50:60] = True
    s = SurveillanceState(DronePos(5, 5, 1), DronePos(0, 0, 1))
    obs = ranging(s, burning, np.random.default_rng(0))
    for cell, val in obs.entries:
        assert val == bool(burning[cell.row, cell.col])


def test_reward_zero_when_all_terms_vanish():
    # uncertainty empty, drones vertically separated beyond D_u, both ground
    # blocks covering the origin, no corridor
    unc = np.zeros((100, 100))
    s = SurveillanceState(DronePos(5, 5, 1), DronePos(5, 5, 7))
    origin = CellIndex(50, 50)  # center (101, 101) m inside both 20 m blocks
    r = surveillance_reward(s, unc, set(), None, origin, PenaltyParams())
    assert r == 0.0


def test_reward_stacking_penalty():
    unc = np.zeros((100, 100))
    params = PenaltyParams(tau4=0.0)
    s = SurveillanceState(DronePos(4, 4, 3), DronePos(4, 5, 3))  # 20 m apart
    r = surveillance_reward(s, unc, set(), None, CellIndex(50, 50), params)
    assert r == -params.tau2


def test_reward_corridor_penalty_any_altitude():
    unc = np.zeros((100, 100))
    params = PenaltyParams(tau4=0.0)
    drop = SuppressionActionSpec(CellIndex(50, 50), DropType.LINE_NS)
    aoa = axis_of_advance(drop, (220.0, 100.0))
    # drone at max altitude directly above the NS line through col 50
    s = SurveillanceState(DronePos(5, 2, AIR_Z_MAX), DronePos(9, 9, 1))
    r = surveillance_reward(s, unc, set(), aoa, CellIndex(0, 0), params)
    assert r <= -params.tau3


def test_reward_corridor_penalty_applied_once():
    unc = np.zeros((100, 100))
    params = PenaltyParams(tau4=0.0)
    drop = SuppressionActionSpec(CellIndex(50, 50), DropType.LINE_NS)
    aoa = axis_of_advance(drop, (220.0, 100.0))
    # both drones near the corridor, far from each other vertically
    s = SurveillanceState(DronePos(5, 2, 1), DronePos(5, 2, 7))
    r = surveillance_reward(s, unc, set(), aoa, CellIndex(5, 45), params)
    assert r == -params.tau3


def test_reward_observed_uncertainty_anti_monotone():
    rng = np.random.default_rng(2)
    unc = rng.random((100, 100)) * 0.2
    s = SurveillanceState(DronePos(5, 5, 1), DronePos(5, 5, 7))
    obs = {CellIndex(50, 50), CellIndex(51, 51)}
    base = surveillance_reward(s, unc, obs, None, CellIndex(50, 50), PenaltyParams())
    unc2 = unc.copy()
    unc2[50, 50] += 0.5
    more = surveillance_reward(s, unc2, obs, None, CellIndex(50, 50), PenaltyParams())
    assert more >= base


def test_reward_origin_leash_scales_with_distance():
    unc = np.zeros((100, 100))
    params = PenaltyParams()
    near = SurveillanceState(DronePos(5, 5, 1), DronePos(5, 5, 7))
    far = SurveillanceState(DronePos(9, 9, 1), DronePos(9, 9, 7))
    origin = CellIndex(50, 50)
    assert surveillance_reward(far, unc, set(), None, origin, params) \
        < surveillance_reward(near, unc, set(), None, origin, params)


def test_reward_accepts_observation_batch():
    unc = np.zeros((100, 100))
    unc[10, 10] = 0.4
    obs = ObservationBatch([(CellIndex(10, 10), False)])
    s = SurveillanceState(DronePos(5, 5, 1), DronePos(5, 5, 7))
    params = PenaltyParams(tau4=0.0)
    r = surveillance_reward(s, unc, obs, None, CellIndex(50, 50), params)
    assert np.isclose(r, 0.4)
