"""Dominance, Pareto filtering and hypervolume against oracles."""

import numpy as np
import pytest

from paretogen.metrics import (ParetoArchive, combined_front_contributions,
                               dominates, hypervolume_exact, hypervolume_mc,
                               pareto_front)


def test_dominates_cases():
    assert dominates(np.array([-1.0, -1.0]), np.array([-0.5, -0.5]))
    assert dominates(np.array([-1.0, -0.5]), np.array([-0.5, -0.5]))
    assert not dominates(np.array([-0.5, -0.5]), np.array([-0.5, -0.5]))
    assert not dominates(np.array([-1.0, -0.2]), np.array([-0.5, -0.5]))


def test_pareto_front_hand_case():
    Y = np.array([
        [-1.0, -0.1],
        [-0.5, -0.5],
        [-0.4, -0.4],    # dominated by the row above
        [-0.1, -1.0],
    ])
    assert pareto_front(Y).tolist() == [0, 1, 3]


def test_pareto_front_keeps_first_duplicate():
    Y = np.array([[-0.5, -0.5], [-0.5, -0.5], [-1.0, -1.0]])
    assert pareto_front(Y).tolist() == [2]
    Y2 = np.array([[-0.5, -0.5], [-0.5, -0.5]])
    assert pareto_front(Y2).tolist() == [0]


def test_hypervolume_hand_values():
    assert hypervolume_exact(np.array([[-1.0, -1.0, -1.0]])) == pytest.approx(1.0)
    assert hypervolume_exact(np.array([[-1.0, -0.5], [-0.5, -1.0]])) == pytest.approx(0.75)
    # 1-D: plain length
    assert hypervolume_exact(np.array([[-0.7]])) == pytest.approx(0.7)
    # 3-D union of two boxes: 0.5 + 0.25 - 0.125
    Y = np.array([[-1.0, -1.0, -0.5], [-0.5, -0.5, -1.0]])
    assert hypervolume_exact(Y) == pytest.approx(0.625)


def test_hypervolume_reference_shifts_and_clipping():
    Y = np.array([[-1.0, -1.0]])
    assert hypervolume_exact(Y, ref=np.array([1.0, 1.0])) == pytest.approx(4.0)
    # a point at or beyond the reference contributes nothing
    assert hypervolume_exact(np.array([[0.2, -1.0]])) == 0.0
    assert hypervolume_exact(np.array([[0.2, -1.0], [-1.0, -1.0]])) == pytest.approx(1.0)
    # empty input
    assert hypervolume_exact(np.zeros((0, 2))) == 0.0


def test_hypervolume_duplicates_do_not_double_count():
    Y = np.array([[-0.8, -0.8], [-0.8, -0.8]])
    assert hypervolume_exact(Y) == pytest.approx(0.64)


def test_hypervolume_dominated_points_are_free():
    Y = np.array([[-1.0, -1.0], [-0.4, -0.3], [-0.2, -0.9]])
    assert hypervolume_exact(Y) == pytest.approx(1.0)


def test_exact_matches_monte_carlo():
    rng = np.random.default_rng(0)
    for trial in range(10):
        n = int(rng.integers(2, 4))
        Y = -rng.uniform(0.05, 1.0, size=(int(rng.integers(2, 12)), n))
        exact = hypervolume_exact(Y)
        est, se = hypervolume_mc(Y, n_samples=40000,
                                 rng=np.random.default_rng(100 + trial))
        assert abs(est - exact) < 4 * max(se, 1e-12)


def test_monte_carlo_standard_error_formula():
    Y = np.array([[-1.0, -0.5], [-0.5, -1.0]])
    est, se = hypervolume_mc(Y, n_samples=10000, rng=np.random.default_rng(1))
    p = est / 1.0                         # reference box has volume 1
    assert se == pytest.approx(np.sqrt(p * (1 - p) / 10000), rel=1e-6)


def test_hypervolume_exact_rejects_high_dimensions():
    with pytest.raises(ValueError):
        hypervolume_exact(-np.ones((2, 4)))
    est, se = hypervolume_mc(-0.9 * np.ones((1, 4)), n_samples=20000,
                             rng=np.random.default_rng(0))
    assert abs(est - 0.9 ** 4) < 4 * se + 1e-12


def test_combined_front_contributions_hand_case():
    labeled = {
        "a": np.array([[-1.0, -0.1], [-0.3, -0.3]]),
        "b": np.array([[-0.1, -1.0], [-0.4, -0.4]]),
    }
    counts, hv, rows = combined_front_contributions(labeled)
    assert counts == {"a": 1, "b": 2}
    got_labels = [lab for lab, _ in rows]
    assert sorted(got_labels) == ["a", "b", "b"]
    want = hypervolume_exact(np.array([[-1.0, -0.1], [-0.1, -1.0], [-0.4, -0.4]]))
    assert hv == pytest.approx(want)


def test_pareto_archive_equals_batch_filter():
    rng = np.random.default_rng(9)
    pts = rng.uniform(-1, 0, size=(200, 3))
    archive = ParetoArchive()
    for i, y in enumerate(pts):
        archive.add(np.array([float(i)]), y, source=f"s{i % 3}")
    direct = pts[pareto_front(pts)]
    got = archive.front()
    assert sorted(map(tuple, got.tolist())) == sorted(map(tuple, direct.tolist()))
    assert len(archive) == direct.shape[0]
    # a dominated insert is rejected and leaves the archive unchanged
    assert archive.add(np.zeros(1), np.array([-0.001, -0.001, -0.001])) is False
    assert len(archive) == direct.shape[0]
