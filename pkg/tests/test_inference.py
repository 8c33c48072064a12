import itertools
import math

import numpy as np
import pytest

from conftest import random_model
from efekit.errors import SupportError, ZeroEvidence
from efekit.inference import exact_filter_posterior, log_evidence, variational_free_energy
from efekit.model import PomdpModel
from efekit.prob import marginalize
from oracles import chain_joint, chain_posterior_marginals, random_categorical


def _arrays(m):
    return m.prior_d, m.likelihood_a, m.transitions_b


def _random_history(rng, m, t):
    obs = [int(o) for o in rng.integers(0, m.n_obs, size=t + 1)]
    acts = [int(a) for a in rng.integers(0, m.n_actions, size=t)]
    return obs, acts


def test_deterministic_world_stays_put():
    m = PomdpModel([1, 0, 0], np.eye(3), np.eye(3)[None])
    chain = exact_filter_posterior(m, [0, 0, 0], [0, 0])
    for q in chain.marginals:
        np.testing.assert_array_equal(q.probs, [1, 0, 0])


def test_single_step_bayes(two_state_model):
    chain = exact_filter_posterior(two_state_model, [0], [])
    np.testing.assert_allclose(chain.current.probs, [0.45 / 0.55, 0.10 / 0.55], atol=1e-12)


def test_matches_brute_force(rng):
    for _ in range(20):
        m = random_model(rng, n_states=3)
        obs, acts = _random_history(rng, m, 2)
        expected, _ = chain_posterior_marginals(*_arrays(m), obs, acts)
        chain = exact_filter_posterior(m, obs, acts)
        got = np.array([q.probs for q in chain.marginals])
        np.testing.assert_allclose(got, expected, atol=1e-10)


def test_pairwise_tables_match_brute_force(rng):
    m = random_model(rng, n_states=3, n_actions=2)
    obs, acts = _random_history(rng, m, 3)
    joint = chain_joint(*_arrays(m), obs, acts)
    evidence = sum(joint.values())
    chain = exact_filter_posterior(m, obs, acts)
    for k, table in enumerate(chain.pairwise, start=1):
        expected = np.zeros((3, 3))
        for seq, p in joint.items():
            expected[seq[k - 1], seq[k]] += p / evidence
        np.testing.assert_allclose(table.values, expected, atol=1e-10)
        np.testing.assert_allclose(marginalize(table, [f"s_{k}"]).values, chain.marginals[k].probs, atol=1e-9)


def test_log_evidence_examples(two_state_model):
    certain = PomdpModel([1, 0], np.eye(2), np.eye(2)[None])
    assert log_evidence(certain, [0, 0], [0]) == 0.0
    assert log_evidence(two_state_model, [0], []) == pytest.approx(math.log(0.55), abs=1e-12)
    with pytest.raises(ZeroEvidence):
        log_evidence(certain, [1], [])
    assert log_evidence(certain, [1], [], strict=False) == -math.inf


def test_log_evidence_matches_brute_force(rng):
    for _ in range(20):
        m = random_model(rng)
        obs, acts = _random_history(rng, m, int(rng.integers(0, 4)))
        evidence = sum(chain_joint(*_arrays(m), obs, acts).values())
        assert log_evidence(m, obs, acts) == pytest.approx(math.log(evidence), abs=1e-10)


def test_vfe_certain_world():
    m = PomdpModel([1, 0], np.eye(2), np.eye(2)[None])
    assert variational_free_energy(m, [[1, 0]], [0], []) == 0.0


def test_vfe_at_prior_is_negative_expected_log_likelihood(two_state_model):
    d = two_state_model.prior_d
    a = two_state_model.likelihood_a
    expected = -sum(d[s] * math.log(a[0, s]) for s in range(2))
    assert variational_free_energy(two_state_model, [d], [0], []) == pytest.approx(expected, abs=1e-12)


def test_vfe_at_exact_posterior_equals_surprise(two_state_model):
    q = exact_filter_posterior(two_state_model, [0], [])
    assert variational_free_energy(two_state_model, q, [0], []) == pytest.approx(-math.log(0.55), abs=1e-9)


def _mean_field_kl_to_posterior(m, qs, obs, acts):
    """KL[prod q_k || P(s | o, a)] by enumerating every state sequence."""
    joint = chain_joint(*_arrays(m), obs, acts)
    evidence = sum(joint.values())
    total = 0.0
    for seq, p in joint.items():
        qq = np.prod([qs[k][s] for k, s in enumerate(seq)])
        if qq > 0:
            total += qq * math.log(qq / (p / evidence))
    return total


def test_vfe_gap_is_mean_field_kl(rng):
    for _ in range(20):
        m = random_model(rng)
        obs, acts = _random_history(rng, m, int(rng.integers(0, 3)))
        qs = [random_categorical(rng, m.n_states, floor=0.0) for _ in obs]
        gap = variational_free_energy(m, qs, obs, acts) + log_evidence(m, obs, acts)
        assert gap == pytest.approx(_mean_field_kl_to_posterior(m, qs, obs, acts), abs=1e-9)
        assert gap >= -1e-9


def test_vfe_support_policy():
    m = PomdpModel([1, 0], [[0.5, 0.5], [0.5, 0.5]], np.eye(2)[None])
    assert variational_free_energy(m, [[0.5, 0.5]], [0], []) == math.inf
    with pytest.raises(SupportError):
        variational_free_energy(m, [[0.5, 0.5]], [0], [], on_support="raise")


def test_vfe_zero_evidence():
    m = PomdpModel([1, 0], np.eye(2), np.eye(2)[None])
    with pytest.raises(ZeroEvidence):
        variational_free_energy(m, [[1, 0]], [1], [])
