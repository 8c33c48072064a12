import numpy as np
import pytest

from conftest import EQ8_A
from efekit.errors import DimMismatch
from efekit.preferences import (
    feasibility_check,
    observation_prefs_from_state_prefs,
    valid_class_vertices,
)
from oracles import grid_min_l1, random_categorical


def random_likelihood(rng, n_obs, n_states, floor=0.0):
    return random_categorical(rng, n_obs, floor, size=n_states).T


def test_obs_prefs_examples():
    np.testing.assert_allclose(observation_prefs_from_state_prefs(np.eye(2), [0.3, 0.7]).probs, [0.3, 0.7])
    np.testing.assert_allclose(observation_prefs_from_state_prefs(EQ8_A, [1, 0]).probs, [0.6, 0.4])
    np.testing.assert_allclose(observation_prefs_from_state_prefs(EQ8_A, [0.5, 0.5]).probs, [0.5, 0.5])
    with pytest.raises(DimMismatch):
        observation_prefs_from_state_prefs(EQ8_A, [1, 0, 0])


def test_counterexample():
    v = feasibility_check(EQ8_A, [0.8, 0.2])
    assert not v.feasible
    assert v.c_s is None
    np.testing.assert_allclose(v.raw_solution, [2, -1], atol=1e-12)
    assert v.method == "direct"
    # closest reachable point is the vertex [0.6, 0.4]
    assert v.residual == pytest.approx(0.4, abs=1e-9)


def test_identity_is_always_feasible(rng):
    for n in (2, 3, 5):
        c_o = random_categorical(rng, n, floor=0.0)
        v = feasibility_check(np.eye(n), c_o)
        assert v.feasible
        np.testing.assert_allclose(v.c_s.probs, c_o, atol=1e-12)


@pytest.mark.parametrize("shape", [(2, 2), (3, 3), (4, 2), (3, 5), (6, 6)])
def test_round_trip(rng, shape):
    for _ in range(40):
        a = random_likelihood(rng, *shape)
        x = random_categorical(rng, shape[1], floor=0.0)
        c_o = a @ x
        v = feasibility_check(a, c_o)
        assert v.feasible
        assert np.abs(a @ v.c_s.probs - c_o).sum() <= 1e-8
        assert v.residual <= 1e-8


def test_singular_square_goes_through_l1_program():
    a = np.array([[0.5, 0.5, 0.2], [0.5, 0.5, 0.8], [0.0, 0.0, 0.0]])
    v = feasibility_check(a, [0.3, 0.7, 0.0])
    assert v.method == "l1-program" and v.ill_conditioned
    assert v.feasible
    v = feasibility_check(a, [0.3, 0.6, 0.1])
    assert not v.feasible and v.residual == pytest.approx(0.2, abs=1e-9)


def test_vertices():
    verts = valid_class_vertices(EQ8_A)
    assert [v.probs.tolist() for v in verts] == [[0.6, 0.4], [0.4, 0.6]]
    verts = valid_class_vertices(np.eye(3))
    assert [v.probs.tolist() for v in verts] == np.eye(3).tolist()
    mid = (verts[0].probs + verts[1].probs) / 2
    assert feasibility_check(np.eye(3), mid).feasible


def test_convex_combinations_accepted(rng):
    for _ in range(200):
        n_states = int(rng.integers(2, 5))
        a = random_likelihood(rng, int(rng.integers(2, 5)), n_states)
        w = random_categorical(rng, n_states, floor=0.0)
        c_o = sum(wi * v.probs for wi, v in zip(w, valid_class_vertices(a)))
        assert feasibility_check(a, c_o).feasible


def test_points_outside_hull_rejected(rng):
    for _ in range(100):
        a = random_likelihood(rng, 2, 2, floor=0.05)
        v1, v2 = (v.probs for v in valid_class_vertices(a))
        if np.abs(v1 - v2).sum() < 1e-3:
            continue
        end, other = (v1, v2) if v1[0] > v2[0] else (v2, v1)
        direction = (end - other) / np.linalg.norm(end - other)
        delta = rng.uniform(0.011, 0.04)
        c_o = end + delta * direction
        if c_o.min() < 0:
            continue
        v = feasibility_check(a, c_o)
        assert not v.feasible
        assert v.residual > 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_agrees_with_grid_search(rng, n):
    checked = 0
    while checked < (60 if n == 2 else 15):
        a = random_likelihood(rng, n, n, floor=0.02)
        if np.linalg.cond(a) > 50:
            continue
        c_o = random_categorical(rng, n, floor=0.0) if rng.random() < 0.5 else a @ random_categorical(rng, n, 0.0)
        raw = np.linalg.solve(a, c_o)
        if np.abs(raw).min() < 0.02:
            continue  # near a face of the simplex: grid resolution cannot decide
        verdict = feasibility_check(a, c_o)
        if n == 2:
            grid = grid_min_l1(a, c_o)
        else:
            k = 1000
            i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
            keep = i + j <= k
            xs = np.stack([i[keep], j[keep], k - i[keep] - j[keep]], axis=1) / k
            grid = float(np.abs(xs @ a.T - c_o).sum(axis=1).min())
        assert verdict.feasible == (grid <= 5e-3)
        checked += 1


def test_two_state_segment_matches_grid_minimum():
    from efekit.preferences import min_l1_residual

    rng = np.random.default_rng(31)
    for _ in range(200):
        n_obs = int(rng.integers(2, 6))
        a = random_likelihood(rng, n_obs, 2)
        c_o = random_categorical(rng, n_obs, floor=0.0)
        res, x = min_l1_residual(a, c_o)
        w = np.linspace(0.0, 1.0, 20001)
        grid = np.abs(np.outer(w, a[:, 0]) + np.outer(1 - w, a[:, 1]) - c_o).sum(axis=1).min()
        assert res <= grid + 1e-12
        assert grid - res <= 1e-3
        assert x.min() >= 0 and abs(x.sum() - 1) <= 1e-12
