"""POMDP generative model: parameters, validation, JSON files and the DAG view."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DimMismatch, ParseError, ValidationError
from .prob import VALIDATION_TOL, Categorical


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PomdpModel:
    """Discrete POMDP.

    Matrices are column-stochastic: ``likelihood_a[o, s] = P(o | s)`` and
    ``transitions_b[a][s_next, s] = P(s_next | s, a)``.
    """

    prior_d: np.ndarray
    likelihood_a: np.ndarray
    transitions_b: np.ndarray
    states: tuple[str, ...] = ()
    observations: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()

    def __post_init__(self):
        d = _frozen(self.prior_d)
        a = _frozen(self.likelihood_a)
        b = _frozen(self.transitions_b)
        if d.ndim != 1 or d.size < 1:
            raise DimMismatch(f"prior_d must be a non-empty vector, got shape {d.shape}")
        n_s = d.size
        if a.ndim != 2 or a.shape[1] != n_s or a.shape[0] < 1:
            raise DimMismatch(f"likelihood_a must be n_obs x {n_s}, got shape {a.shape}")
        if b.ndim != 3 or b.shape[1:] != (n_s, n_s) or b.shape[0] < 1:
            raise DimMismatch(f"transitions_b must be n_actions x {n_s} x {n_s}, got shape {b.shape}")
        object.__setattr__(self, "prior_d", d)
        object.__setattr__(self, "likelihood_a", a)
        object.__setattr__(self, "transitions_b", b)
        for attr, n, stem in (
            ("states", n_s, "s"),
            ("observations", a.shape[0], "o"),
            ("actions", b.shape[0], "a"),
        ):
            names = tuple(getattr(self, attr)) or tuple(f"{stem}{i}" for i in range(n))
            if len(names) != n:
                raise DimMismatch(f"{len(names)} {attr} names for dimension {n}")
            object.__setattr__(self, attr, names)

    @property
    def n_states(self) -> int:
        return self.prior_d.size

    @property
    def n_obs(self) -> int:
        return self.likelihood_a.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transitions_b.shape[0]

    @property
    def prior(self) -> Categorical:
        return Categorical(self.prior_d, self.states)


def _check_vector(label, vec, tol=VALIDATION_TOL):
    problems = []
    for i, v in enumerate(vec):
        if not np.isfinite(v):
            problems.append(f"{label} index {i} is not finite ({v})")
        elif v < 0:
            problems.append(f"{label} index {i} is negative ({v:g})")
    total = float(np.sum(vec))
    if abs(total - 1.0) > tol:
        problems.append(f"{label} sums to {total:.12g}")
    return problems


def validate_model(m: PomdpModel) -> list[str]:
    """List every stochasticity violation in ``m``; empty means valid."""
    report = _check_vector("prior_d", m.prior_d)
    for c in range(m.n_states):
        report += _check_vector(f"likelihood_a column {c}", m.likelihood_a[:, c])
    for k in range(m.n_actions):
        for c in range(m.n_states):
            report += _check_vector(f"transitions_b matrix {k} column {c}", m.transitions_b[k][:, c])
    return report


def checked(m: PomdpModel) -> PomdpModel:
    report = validate_model(m)
    if report:
        raise ValidationError(report)
    return m


def model_to_dict(m: PomdpModel) -> dict:
    return {
        "states": list(m.states),
        "observations": list(m.observations),
        "actions": list(m.actions),
        "prior_d": m.prior_d.tolist(),
        "likelihood_a": m.likelihood_a.tolist(),
        "transitions_b": m.transitions_b.tolist(),
    }


def model_from_dict(doc: dict) -> PomdpModel:
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    for key in ("prior_d", "likelihood_a", "transitions_b"):
        if key not in doc:
            raise ParseError(f"missing key {key!r}")
    try:
        m = PomdpModel(
            prior_d=doc["prior_d"],
            likelihood_a=doc["likelihood_a"],
            transitions_b=doc["transitions_b"],
            states=tuple(doc.get("states", ())),
            observations=tuple(doc.get("observations", ())),
            actions=tuple(doc.get("actions", ())),
        )
    except (DimMismatch, TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    return checked(m)


def load_model(path) -> PomdpModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return model_from_dict(doc)


def save_model(m: PomdpModel, path) -> None:
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(m), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class Dag:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        nodes = tuple(self.nodes)
        edges = tuple((str(u), str(v)) for u, v in self.edges)
        if len(set(nodes)) != len(nodes):
            raise ValueError("duplicate node names")
        if len(set(edges)) != len(edges):
            raise ValueError("duplicate edges")
        known = set(nodes)
        for u, v in edges:
            if u not in known or v not in known:
                raise ValueError(f"edge {u}->{v} uses an undeclared node")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)
        if len(self.topological_order()) != len(nodes):
            raise ValueError("graph contains a cycle")

    @cached_property
    def parents(self) -> dict[str, frozenset[str]]:
        pa = {v: set() for v in self.nodes}
        for u, v in self.edges:
            pa[v].add(u)
        return {v: frozenset(p) for v, p in pa.items()}

    @cached_property
    def children(self) -> dict[str, frozenset[str]]:
        ch = {v: set() for v in self.nodes}
        for u, v in self.edges:
            ch[u].add(v)
        return {v: frozenset(c) for v, c in ch.items()}

    def topological_order(self) -> list[str]:
        indeg = {v: 0 for v in self.nodes}
        out = {v: [] for v in self.nodes}
        for u, v in self.edges:
            indeg[v] += 1
            out[u].append(v)
        queue = deque(v for v in self.nodes if indeg[v] == 0)
        order = []
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in out[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        return order

    def descendants(self, v: str) -> set[str]:
        """Proper descendants of ``v`` (``v`` itself excluded)."""
        seen = set()
        stack = list(self.children[v])
        while stack:
            u = stack.pop()
            if u not in seen:
                seen.add(u)
                stack.extend(self.children[u])
        return seen

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, doc: dict) -> "Dag":
        try:
            return cls(tuple(doc["nodes"]), tuple(tuple(e) for e in doc["edges"]))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"DAG document needs 'nodes' and 'edges': {exc}") from exc


def to_dag(m: PomdpModel | None, past_steps: int, future_steps: int) -> Dag:
    """Unrolled Bayesian network over ``s_0..s_T``, ``o_0..o_T``, ``a_0..a_{T-1}``
    with ``T = past_steps + future_steps``. Actions are parentless."""
    if past_steps < 0 or future_steps < 0:
        raise ValueError("step counts must be non-negative")
    horizon = past_steps + future_steps
    nodes = [f"s_{k}" for k in range(horizon + 1)]
    nodes += [f"o_{k}" for k in range(horizon + 1)]
    nodes += [f"a_{k}" for k in range(horizon)]
    edges = [(f"s_{k}", f"o_{k}") for k in range(horizon + 1)]
    for k in range(1, horizon + 1):
        edges.append((f"s_{k - 1}", f"s_{k}"))
        edges.append((f"a_{k - 1}", f"s_{k}"))
    return Dag(tuple(nodes), tuple(edges))
