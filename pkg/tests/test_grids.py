import numpy as np

from fireline.grids import (
    GRID_SIZE,
    UNCERTAINTY_NEIGHBORHOOD,
    UNCERTAINTY_RADIUS,
    BeliefState,
    CellIndex,
    ObservationBatch,
    box_count,
    increment_uncertainty,
    instantaneous_destruction,
    ring_radius,
    update_belief,
)


def test_update_belief_empty_batch_is_identity():
    belief = BeliefState.empty()
    belief.believed_burning[10, 10] = True
    belief.uncertainty[3, 4] = 0.5
    out = update_belief(belief, ObservationBatch())
    assert np.array_equal(out.believed_burning, belief.believed_burning)
    assert np.array_equal(out.uncertainty, belief.uncertainty)


def test_update_belief_single_cell():
    belief = BeliefState.empty()
    obs = ObservationBatch([(CellIndex(50, 50), True)])
    out = update_belief(belief, obs)
    assert out.believed_burning.sum() == 1
    assert out.believed_burning[50, 50]
    assert out.uncertainty[50, 50] == 0.0


def test_update_belief_last_write_wins():
    belief = BeliefState.empty()
    a = CellIndex(7, 9)
    obs = ObservationBatch([(a, True), (a, False)])
    out = update_belief(belief, obs)
    assert not out.believed_burning[a.row, a.col]


def test_increment_uncertainty_no_fire_increments_nothing():
    belief = BeliefState.empty()
    out = increment_uncertainty(belief, observed=set())
    assert np.all(out.uncertainty == 0.0)


def test_increment_uncertainty_neighborhood_fraction():
    # 11 believed-burning cells inside the radius-5 box around (50, 50)
    belief = BeliefState.empty()
    burning_cells = [(50 + dr, 50 + dc) for dr, dc in
                     [(-5, -5), (-5, 0), (-4, 3), (-2, -1), (0, 5), (1, 1),
                      (2, -4), (3, 3), (4, 0), (5, -5), (5, 5)]]
    for r, c in burning_cells:
        belief.believed_burning[r, c] = True
    out = increment_uncertainty(belief, observed=set())
    # brute-force membership count
    count = sum(1 for r, c in burning_cells
                if abs(r - 50) <= UNCERTAINTY_RADIUS
                and abs(c - 50) <= UNCERTAINTY_RADIUS)
    assert count == 11
    assert np.isclose(out.uncertainty[50, 50], 11 / UNCERTAINTY_NEIGHBORHOOD)


def test_increment_uncertainty_observed_cell_resets_to_zero():
    belief = BeliefState.empty()
    belief.believed_burning[50, 50] = True
    belief.uncertainty[50, 51] = 0.7
    out = increment_uncertainty(belief, observed={CellIndex(50, 51)})
    assert out.uncertainty[50, 51] == 0.0
    # an unobserved neighbor still grows
    assert out.uncertainty[51, 51] > 0.0


def test_increment_uncertainty_caps_at_one():
    belief = BeliefState.empty()
    belief.believed_burning[40:60, 40:60] = True
    belief.uncertainty[:, :] = 0.99
    out = increment_uncertainty(belief, observed=set())
    assert out.uncertainty.max() <= 1.0
    assert np.isclose(out.uncertainty[50, 50], 1.0)


def test_destruction_empty():
    n = GRID_SIZE
    burning = np.zeros((n, n), dtype=bool)
    resources = np.zeros((n, n))
    assert instantaneous_destruction(burning, resources) == 0.0


def test_destruction_single_cell_no_resources():
    n = GRID_SIZE
    burning = np.zeros((n, n), dtype=bool)
    burning[5, 5] = True
    resources = np.zeros((n, n))
    assert instantaneous_destruction(burning, resources) == 1.0


def test_destruction_sums_one_plus_resource():
    # burning values {0, 2, 5} -> (1+0) + (1+2) + (1+5) = 10
    n = GRID_SIZE
    burning = np.zeros((n, n), dtype=bool)
    resources = np.zeros((n, n))
    for (r, c), v in [((1, 1), 0.0), ((2, 2), 2.0), ((3, 3), 5.0)]:
        burning[r, c] = True
        resources[r, c] = v
    assert instantaneous_destruction(burning, resources) == 10.0


def test_ring_radius_empty_and_origin():
    n = GRID_SIZE
    burning = np.zeros((n, n), dtype=bool)
    assert ring_radius(burning, CellIndex(50, 50)) == 0.0
    burning[50, 50] = True
    assert ring_radius(burning, CellIndex(50, 50)) == 0.0


def test_ring_radius_symmetric_cells():
    # four cells at Euclidean distance 5 cells (3-4-5 triangles) -> 10 m
    n = GRID_SIZE
    burning = np.zeros((n, n), dtype=bool)
    for dr, dc in [(3, 4), (-3, -4), (3, -4), (-3, 4)]:
        burning[50 + dr, 50 + dc] = True
    assert np.isclose(ring_radius(burning, CellIndex(50, 50)), 10.0)


def test_box_count_matches_brute_force():
    rng = np.random.default_rng(11)
    mask = rng.random((30, 30)) < 0.2
    counts = box_count(mask, 5)
    for r in (0, 3, 14, 29):
        for c in (0, 7, 15, 29):
            expect = mask[max(0, r - 5):r + 6, max(0, c - 5):c + 6].sum()
            assert counts[r, c] == expect


def test_observation_batch_collapse_and_cells():
    a, b = CellIndex(1, 2), CellIndex(3, 4)
    obs = ObservationBatch([(a, True), (b, False), (a, False)])
    assert obs.cells() == {a, b}
    assert obs.collapsed() == {a: False, b: False}
    assert len(obs) == 3
