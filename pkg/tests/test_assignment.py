import numpy as np
import pytest

from motrack.assignment import (
    BIG,
    Assignment,
    assignment_total,
    brute_force_solve,
    km_solve,
    solve_dense,
)
from motrack.gating import FORBIDDEN, GatedCost


def from_dense(mat) -> GatedCost:
    """GatedCost with every entry below BIG admissible."""
    mat = np.asarray(mat, dtype=float)
    rows, cols = np.nonzero(mat < BIG)
    return GatedCost(mat.shape[0], mat.shape[1], rows, cols, mat[rows, cols])


def random_cost(rng) -> GatedCost:
    t = int(rng.integers(1, 8))
    k = int(rng.integers(1, 8))
    mat = np.full((t, k), FORBIDDEN)
    admit = rng.random((t, k)) < rng.uniform(0.2, 0.9)
    mat[admit] = rng.random((t, k))[admit]
    return from_dense(mat)


# ---------------------------------------------------------------- solve_dense


def test_solve_dense_single_cell():
    assert solve_dense(np.array([[0.0]])).tolist() == [0]


def test_solve_dense_known_two_by_two():
    # (0,1)+(1,0) totals 4, beating the diagonal's 5.
    row_col = solve_dense(np.array([[1.0, 2.0], [2.0, 4.0]]))
    assert row_col.tolist() == [1, 0]


def test_solve_dense_rectangular_leaves_worst_column():
    row_col = solve_dense(np.array([[5.0, 1.0, 9.0], [4.0, 8.0, 2.0]]))
    assert row_col.tolist() == [1, 2]


def test_solve_dense_rejects_more_rows_than_columns():
    with pytest.raises(ValueError):
        solve_dense(np.zeros((3, 2)))


def test_solve_dense_rejects_non_finite():
    with pytest.raises(ValueError):
        solve_dense(np.array([[0.0, np.inf]]))


def test_solve_dense_empty():
    assert solve_dense(np.zeros((0, 4))).size == 0


def test_solve_dense_matches_permutation_brute_force():
    from itertools import permutations

    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(1, 6))
        mat = rng.random((n, n))
        got = solve_dense(mat)
        best = min(sum(mat[i, p[i]] for i in range(n)) for p in permutations(range(n)))
        assert float(mat[np.arange(n), got].sum()) == pytest.approx(best, abs=1e-12)


# ------------------------------------------------------------------- km_solve


def test_single_admissible_pair():
    a = km_solve(from_dense([[0.4]]))
    assert a.pairs == [(0, 0)]
    assert a.unmatched_tracks == [] and a.unmatched_detections == []


def test_known_total_two_by_two():
    cost = from_dense([[1.0, 2.0], [2.0, 4.0]])
    a = km_solve(cost)
    assert sorted(a.pairs) == [(0, 1), (1, 0)]
    assert assignment_total(cost, a) == pytest.approx(4.0)


def test_forbidden_pairs_never_matched():
    cost = from_dense([[0.1, FORBIDDEN], [0.2, FORBIDDEN]])
    a = km_solve(cost)
    assert a.pairs == [(0, 0)]
    assert a.unmatched_tracks == [1]
    assert a.unmatched_detections == [1]


def test_cardinality_beats_cheapness():
    # A second pair is taken even though (0,0) alone would cost nothing.
    cost = from_dense([[0.0, 0.9], [FORBIDDEN, 0.95]])
    a = km_solve(cost)
    assert sorted(a.pairs) == [(0, 0), (1, 1)]


def test_no_admissible_pairs_leaves_everyone_unmatched():
    cost = GatedCost(3, 2, np.empty(0, int), np.empty(0, int), np.empty(0))
    a = km_solve(cost)
    assert a.pairs == []
    assert a.unmatched_tracks == [0, 1, 2]
    assert a.unmatched_detections == [0, 1]


def test_matches_brute_force_on_small_instances():
    rng = np.random.default_rng(11)
    for _ in range(150):
        cost = random_cost(rng)
        a = km_solve(cost)
        best_total, best_size = brute_force_solve(cost)
        assert len(a.pairs) == best_size
        assert assignment_total(cost, a) == pytest.approx(best_total, abs=1e-9)


def test_constant_shift_keeps_the_matching():
    rng = np.random.default_rng(3)
    for _ in range(40):
        t, k = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        mat = rng.random((t, k))
        shifted = mat + 7.5
        assert km_solve(from_dense(mat)).pairs == km_solve(from_dense(shifted)).pairs


def test_deterministic_resolution_of_ties():
    mat = np.array([[0.5, 0.5], [0.5, 0.5]])
    first = km_solve(from_dense(mat))
    for _ in range(5):
        assert km_solve(from_dense(mat)).pairs == first.pairs


def test_partition_accounting():
    rng = np.random.default_rng(29)
    for _ in range(80):
        cost = random_cost(rng)
        a = km_solve(cost)
        tracks = sorted([t for t, _ in a.pairs] + a.unmatched_tracks)
        dets = sorted([d for _, d in a.pairs] + a.unmatched_detections)
        assert tracks == list(range(cost.n_tracks))
        assert dets == list(range(cost.n_detections))


def test_matched_detection_lookup():
    a = Assignment(pairs=[(0, 2), (3, 1)])
    assert a.matched_detection(0) == 2
    assert a.matched_detection(3) == 1
    assert a.matched_detection(1) is None


def test_assignment_total_empty_matching():
    cost = from_dense([[0.3]])
    assert assignment_total(cost, Assignment()) == 0.0
