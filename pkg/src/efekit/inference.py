"""Exact state inference over the observed chain and variational free energy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimMismatch, SupportError, ZeroEvidence
from .model import PomdpModel
from .prob import VALIDATION_TOL, Categorical, JointTable, as_probs, marginalize


@dataclass(frozen=True)
class PosteriorChain:
    marginals: tuple[Categorical, ...]
    pairwise: tuple[JointTable, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        if self.pairwise is None:
            return
        object.__setattr__(self, "pairwise", tuple(self.pairwise))
        if len(self.pairwise) != len(self.marginals) - 1:
            raise DimMismatch("need one pairwise table per transition")
        for k, table in enumerate(self.pairwise):
            prev, cur = table.names
            for name, q in ((prev, self.marginals[k]), (cur, self.marginals[k + 1])):
                diff = np.abs(marginalize(table, [name]).values - q.probs).max()
                if diff > VALIDATION_TOL:
                    raise DimMismatch(f"pairwise table {k} disagrees with marginal {name} by {diff:g}")

    @property
    def current(self) -> Categorical:
        """Posterior over the latest state ``s_t``."""
        return self.marginals[-1]


def _check_sequence(m: PomdpModel, obs, acts):
    obs = [int(o) for o in obs]
    acts = [int(a) for a in acts]
    if len(obs) != len(acts) + 1:
        raise DimMismatch(f"{len(obs)} observations need {len(obs) - 1} actions, got {len(acts)}")
    if any(not 0 <= o < m.n_obs for o in obs):
        raise IndexError(f"observation index out of range in {obs}")
    if any(not 0 <= a < m.n_actions for a in acts):
        raise IndexError(f"action index out of range in {acts}")
    return obs, acts


def _forward(m: PomdpModel, obs, acts):
    """Scaled forward pass; returns filtered alphas and per-step scale factors."""
    A, B = m.likelihood_a, m.transitions_b
    alphas, scales = [], []
    pred = m.prior_d
    for k, o in enumerate(obs):
        if k > 0:
            pred = B[acts[k - 1]] @ alphas[-1]
        joint = A[o] * pred
        c = joint.sum()
        if c <= 0:
            raise ZeroEvidence(step=k)
        alphas.append(joint / c)
        scales.append(c)
    return alphas, np.array(scales)


def exact_filter_posterior(m: PomdpModel, obs: Sequence[int], acts: Sequence[int]) -> PosteriorChain:
    """Exact ``P(s_k | o_0..o_t, a_0..a_{t-1})`` for every ``k <= t`` by forward-backward."""
    obs, acts = _check_sequence(m, obs, acts)
    A, B = m.likelihood_a, m.transitions_b
    alphas, scales = _forward(m, obs, acts)
    T = len(obs) - 1
    betas = [None] * (T + 1)
    betas[T] = np.ones(m.n_states)
    for k in range(T - 1, -1, -1):
        betas[k] = B[acts[k]].T @ (A[obs[k + 1]] * betas[k + 1]) / scales[k + 1]

    marginals = []
    for k in range(T + 1):
        g = alphas[k] * betas[k]
        marginals.append(Categorical(g / g.sum(), m.states))

    pairwise = []
    for k in range(1, T + 1):
        # xi[i, j] = P(s_{k-1} = i, s_k = j | data)
        xi = alphas[k - 1][:, None] * B[acts[k - 1]].T * (A[obs[k]] * betas[k])[None, :] / scales[k]
        xi = xi / xi.sum()
        pairwise.append(JointTable(((f"s_{k - 1}", m.n_states), (f"s_{k}", m.n_states)), xi))
    return PosteriorChain(tuple(marginals), tuple(pairwise))


def log_evidence(m: PomdpModel, obs: Sequence[int], acts: Sequence[int], strict: bool = True) -> float:
    """``ln P(o_0..o_t | a_0..a_{t-1})``.

    Raises ZeroEvidence for an impossible sequence unless ``strict`` is False,
    in which case ``-inf`` is returned.
    """
    obs, acts = _check_sequence(m, obs, acts)
    try:
        _, scales = _forward(m, obs, acts)
    except ZeroEvidence:
        if strict:
            raise
        return float("-inf")
    return float(np.log(scales).sum())


def _xlogy(x, y):
    """Elementwise x*ln(y) with 0 ln 0 = 0 and x ln 0 = -inf for x > 0."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros(np.broadcast(x, y).shape)
    pos = np.broadcast_to(x > 0, out.shape)
    xb, yb = np.broadcast_to(x, out.shape), np.broadcast_to(y, out.shape)
    with np.errstate(divide="ignore"):
        out[pos] = xb[pos] * np.log(yb[pos])
    return out


def variational_free_energy(
    m: PomdpModel,
    q: PosteriorChain | Sequence,
    obs: Sequence[int],
    acts: Sequence[int],
    on_support: str = "inf",
) -> float:
    """Complexity minus accuracy for the mean-field ``Q(s_0..s_t) = prod_k q_k(s_k)``.

    ``on_support`` decides what happens when Q puts mass on a state sequence the
    prior rules out: ``"inf"`` returns ``+inf``, ``"raise"`` raises SupportError.
    """
    obs, acts = _check_sequence(m, obs, acts)
    marginals = q.marginals if isinstance(q, PosteriorChain) else q
    qs = [as_probs(p) for p in marginals]
    if len(qs) != len(obs) or any(p.shape != (m.n_states,) for p in qs):
        raise DimMismatch("need one state marginal per observation")
    if log_evidence(m, obs, acts, strict=False) == float("-inf"):
        raise ZeroEvidence()

    A, B = m.likelihood_a, m.transitions_b
    neg_entropy = sum(float(_xlogy(p, p).sum()) for p in qs)
    # E_Q[ln P(s_0..s_t | a)]
    prior_term = float(_xlogy(qs[0], m.prior_d).sum())
    for k in range(1, len(qs)):
        pair = qs[k][:, None] * qs[k - 1][None, :]  # [s_k, s_{k-1}]
        prior_term += float(_xlogy(pair, B[acts[k - 1]]).sum())
    if np.isneginf(prior_term):
        if on_support == "raise":
            raise SupportError("Q places mass where the prior over state sequences is zero")
        return float("inf")
    complexity = neg_entropy - prior_term
    accuracy = sum(float(_xlogy(p, A[o]).sum()) for p, o in zip(qs, obs))
    return float(complexity - accuracy)
