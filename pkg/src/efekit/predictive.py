"""Forecast and target distributions over future observation/state sequences.

Both joints are materialized as JointTable objects with axes
``o_1..o_d, s_1..s_d`` where ``k`` counts steps after the present.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DepthMismatch, DepthTooLarge, DimMismatch
from .model import PomdpModel
from .prob import Categorical, JointTable, as_probs, marginalize

DEFAULT_ENUM_CAP = 10**7


def enumeration_cap() -> int:
    """Joint-cell cap, overridable through ``EFEKIT_ENUM_CAP``."""
    raw = os.environ.get("EFEKIT_ENUM_CAP")
    return int(float(raw)) if raw else DEFAULT_ENUM_CAP


@dataclass(frozen=True)
class Policy:
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if len(self.actions) < 1:
            raise ValueError("a policy needs at least one action")
        if any(a < 0 for a in self.actions):
            raise ValueError("action indices must be non-negative")

    @property
    def depth(self) -> int:
        return len(self.actions)

    def label(self) -> str:
        return "-".join(str(a) for a in self.actions)

    def check(self, m: PomdpModel) -> "Policy":
        if any(a >= m.n_actions for a in self.actions):
            raise IndexError(f"policy {self.actions} uses an action >= {m.n_actions}")
        return self


def sequence_axes(n_obs: int, n_states: int, depth: int):
    return tuple((f"o_{k}", n_obs) for k in range(1, depth + 1)) + tuple(
        (f"s_{k}", n_states) for k in range(1, depth + 1)
    )


def _check_cells(n_obs, n_states, depth):
    cells = (n_obs * n_states) ** depth
    cap = enumeration_cap()
    if cells > cap:
        raise DepthTooLarge(f"{cells} joint cells exceed the enumeration cap {cap}")


def _with_obs_axes(state_joint: np.ndarray, A: np.ndarray) -> np.ndarray:
    depth = state_joint.ndim
    n_obs, n_states = A.shape
    out = state_joint.reshape((1,) * depth + state_joint.shape)
    for k in range(depth):
        shape = [1] * (2 * depth)
        shape[k] = n_obs
        shape[depth + k] = n_states
        out = out * A.reshape(shape)
    return out


@dataclass(frozen=True, eq=False)
class ForecastDistribution:
    policy: Policy
    root: Categorical
    step_transitions: tuple[np.ndarray, ...]
    step_likelihood: np.ndarray
    joint: JointTable

    @property
    def depth(self) -> int:
        return self.policy.depth


@dataclass(frozen=True, eq=False)
class TargetDistribution:
    state_prefs: tuple[Categorical, ...]
    likelihood: np.ndarray
    joint: JointTable
    obs_prefs: tuple[Categorical, ...]

    @property
    def depth(self) -> int:
        return len(self.state_prefs)


def build_forecast(m: PomdpModel, posterior_t, pi: Policy) -> ForecastDistribution:
    """Predict ``F(o, s | policy)`` from the current state posterior and the model."""
    pi = pi.check(m)
    q = as_probs(posterior_t)
    if q.shape != (m.n_states,):
        raise DimMismatch(f"posterior has {q.size} entries, model has {m.n_states} states")
    _check_cells(m.n_obs, m.n_states, pi.depth)
    B = m.transitions_b
    root = B[pi.actions[0]] @ q
    state_joint = root
    steps = []
    for a in pi.actions[1:]:
        Bk = B[a]
        steps.append(Bk)
        # new[..., s_prev, s_next] = old[..., s_prev] * B[s_next, s_prev]
        state_joint = state_joint[..., None] * Bk.T.reshape((1,) * (state_joint.ndim - 1) + Bk.shape)
    values = _with_obs_axes(state_joint, m.likelihood_a)
    joint = JointTable(sequence_axes(m.n_obs, m.n_states, pi.depth), values)
    return ForecastDistribution(
        policy=pi,
        root=Categorical(root / root.sum(), m.states),
        step_transitions=tuple(steps),
        step_likelihood=m.likelihood_a,
        joint=joint,
    )


def forecast_marginals(f: ForecastDistribution) -> list[tuple[Categorical, Categorical]]:
    """Per-step ``(F(s_k | policy), F(o_k | policy))``."""
    out = []
    for k in range(1, f.depth + 1):
        s = marginalize(f.joint, [f"s_{k}"]).values
        o = marginalize(f.joint, [f"o_{k}"]).values
        out.append((Categorical(s / s.sum()), Categorical(o / o.sum())))
    return out


def broadcast_prefs(state_prefs, depth: int) -> tuple[Categorical, ...]:
    """Accept one preference vector or one per step; return ``depth`` Categoricals."""
    if isinstance(state_prefs, Categorical):
        items = [state_prefs]
    else:
        items = list(state_prefs)
        if items and np.isscalar(items[0]):
            items = [items]
    items = [p if isinstance(p, Categorical) else Categorical(p) for p in items]
    if len(items) == 1:
        return (items[0],) * depth
    if len(items) != depth:
        raise DepthMismatch(f"{len(items)} preference vectors for depth {depth}")
    return tuple(items)


def build_target(m: PomdpModel, state_prefs: Sequence, pi: Policy) -> TargetDistribution:
    """``T(o, s | policy) = prod_k A[o_k, s_k] C_s^(k)[s_k]``; preferences fixed per step."""
    pi = pi.check(m)
    prefs = tuple(state_prefs)
    if len(prefs) != pi.depth:
        raise DepthMismatch(f"{len(prefs)} preference vectors for policy depth {pi.depth}")
    prefs = tuple(p if isinstance(p, Categorical) else Categorical(p) for p in prefs)
    if any(len(p) != m.n_states for p in prefs):
        raise DimMismatch("state preference length differs from n_states")
    _check_cells(m.n_obs, m.n_states, pi.depth)
    state_joint = np.ones(())
    for p in prefs:
        state_joint = np.multiply.outer(state_joint, p.probs)
    A = m.likelihood_a
    values = _with_obs_axes(state_joint, A)
    obs_prefs = tuple(Categorical(A @ p.probs, m.observations) for p in prefs)
    return TargetDistribution(
        state_prefs=prefs,
        likelihood=A,
        joint=JointTable(sequence_axes(m.n_obs, m.n_states, pi.depth), values),
        obs_prefs=obs_prefs,
    )


def load_prefs(path, m: PomdpModel, depth: int) -> tuple[Categorical, ...]:
    """Read a preference file: ``{"state_prefs": [...]}`` with one vector or one per step.

    ``{"obs_prefs": [...]}`` is also accepted; each vector is pulled back to
    state preferences through the likelihood and rejected when no categorical
    state preference reproduces it.
    """
    import json
    from pathlib import Path

    from .errors import ParseError

    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if "state_prefs" in doc:
        return broadcast_prefs(doc["state_prefs"], depth)
    if "obs_prefs" in doc:
        from .preferences import feasibility_check

        recovered = []
        for c_o in broadcast_prefs(doc["obs_prefs"], depth):
            verdict = feasibility_check(m.likelihood_a, c_o)
            if not verdict.feasible:
                raise ValueError(f"observation preferences {c_o.probs.tolist()} are infeasible: {verdict.certificate}")
            recovered.append(verdict.c_s)
        return tuple(recovered)
    raise ParseError(f"{path}: expected a 'state_prefs' or 'obs_prefs' key")
