"""Exhaustive expected-free-energy planner, toy environments and experiment runner."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .efe import FORMULATIONS, EfeReport, unification_report
from .errors import TooManyPolicies, ZeroEvidence
from .inference import exact_filter_posterior
from .model import PomdpModel, load_model, model_from_dict
from .predictive import Policy, broadcast_prefs, build_forecast, build_target, load_prefs
from .preferences import feasibility_check
from .prob import Categorical, as_probs

MAX_POLICIES = 10**5
RNG_ALGORITHM = "PCG64 (numpy.random.default_rng, 64-bit seed)"

CSV_COLUMNS = (
    "episode", "step", "policy", "roa", "igpv", "rsa", "e3", "gap",
    "residual_roa_igpv", "residual_rsa_e3", "bayes_residual", "chosen",
)

IDENTITY_TOL = 1e-8
BOUND_TOL = 1e-9
BAYES_TOL = 1e-9

# Which formulations each candidate root definition recovers, and whether it
# has a known justification.
CAPABILITY_TABLE = {
    "rsa_as_definition": {"igpv": False, "rsa": True, "roa": False, "e3": True, "justified": True},
    "roa_as_definition": {"igpv": True, "rsa": True, "roa": True, "e3": True, "justified": False},
}


def enumerate_policies(n_actions: int, depth: int) -> list[Policy]:
    """All action sequences of length ``depth`` in lexicographic order."""
    if depth < 1 or n_actions < 1:
        raise ValueError("need depth >= 1 and n_actions >= 1")
    if n_actions**depth > MAX_POLICIES:
        raise TooManyPolicies(f"{n_actions}^{depth} policies exceed the cap of {MAX_POLICIES}")
    return [Policy(seq) for seq in itertools.product(range(n_actions), repeat=depth)]


def _rank_key(formulation):
    def key(item):
        policy, report = item
        v = report.value(formulation)
        finite = math.isfinite(v)
        return (not finite, v if finite else 0.0, policy.actions)

    return key


def plan(
    m: PomdpModel,
    posterior_t,
    prefs,
    depth: int,
    formulation: str = "roa",
) -> list[tuple[Policy, EfeReport]]:
    """Score every policy and sort ascending by ``formulation``.

    Infinite values go last; ties fall back to lexicographic action order.
    ``prefs`` may be a callable ``policy -> per-step preferences`` for
    policy-dependent targets.
    """
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}")
    scored = []
    shared = None if callable(prefs) else broadcast_prefs(prefs, depth)
    for pi in enumerate_policies(m.n_actions, depth):
        step_prefs = broadcast_prefs(prefs(pi), depth) if shared is None else shared
        f = build_forecast(m, posterior_t, pi)
        t = build_target(m, step_prefs, pi)
        scored.append((pi, unification_report(f, t, pi)))
    return sorted(scored, key=_rank_key(formulation))


@dataclass
class Environment:
    """True world the agent acts in; dynamics may differ from the agent's model."""

    likelihood_a: np.ndarray
    transitions_b: np.ndarray
    true_state: int
    rng: np.random.Generator

    def __post_init__(self):
        self.likelihood_a = np.asarray(self.likelihood_a, dtype=np.float64)
        self.transitions_b = np.asarray(self.transitions_b, dtype=np.float64)
        if not 0 <= self.true_state < self.likelihood_a.shape[1]:
            raise IndexError(f"true_state {self.true_state} out of range")

    @classmethod
    def from_model(cls, m: PomdpModel, rng: np.random.Generator, true_state: int | None = None):
        if true_state is None:
            true_state = int(rng.choice(m.n_states, p=m.prior_d))
        return cls(m.likelihood_a, m.transitions_b, true_state, rng)

    def observe(self) -> int:
        return int(self.rng.choice(self.likelihood_a.shape[0], p=self.likelihood_a[:, self.true_state]))

    def step(self, action: int) -> int:
        col = self.transitions_b[action][:, self.true_state]
        self.true_state = int(self.rng.choice(col.size, p=col))
        return self.true_state


@dataclass
class ExperimentConfig:
    model_path: str
    prefs_path: str
    horizon_depth: int = 1
    formulation: str = "roa"
    episodes: int = 1
    steps_per_episode: int = 10
    action_selection: str = "argmin"
    temperature: float = 1.0
    seed: int = 0
    output_dir: str = "efekit_run"
    checks_enabled: bool = True
    env_model_path: str | None = None

    def __post_init__(self):
        if self.horizon_depth < 1:
            raise ValueError("horizon_depth must be >= 1")
        if self.episodes < 1 or self.steps_per_episode < 1:
            raise ValueError("episodes and steps_per_episode must be >= 1")
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}")
        if self.action_selection not in ("argmin", "softmax"):
            raise ValueError("action_selection must be 'argmin' or 'softmax'")
        if self.action_selection == "softmax" and not self.temperature > 0:
            raise ValueError("softmax temperature must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @classmethod
    def from_dict(cls, doc: dict, base_dir=None) -> "ExperimentConfig":
        doc = dict(doc)
        sel = doc.get("action_selection", "argmin")
        if isinstance(sel, dict):
            (name, params), = sel.items()
            doc["action_selection"] = name
            if isinstance(params, dict) and "temperature" in params:
                doc["temperature"] = params["temperature"]
        if base_dir is not None:
            for key in ("model_path", "prefs_path", "env_model_path"):
                if doc.get(key) and not Path(doc[key]).is_absolute():
                    doc[key] = str(Path(base_dir) / doc[key])
        return cls(**doc)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Model and preference paths resolve against the config file's folder."""
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")), base_dir=path.parent)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class StepRecord:
    step: int
    observation: int
    posterior: list[float]
    ranked: list[tuple[Policy, EfeReport]]
    chosen: Policy
    action: int
    true_state: int
    next_state: int


def select_policy(ranked, cfg: ExperimentConfig, rng: np.random.Generator) -> Policy:
    if cfg.action_selection == "argmin":
        return ranked[0][0]
    values = np.array([r.value(cfg.formulation) for _, r in ranked])
    finite = np.isfinite(values)
    if not finite.any():
        return ranked[0][0]
    logits = np.full(values.shape, -np.inf)
    logits[finite] = -(values[finite] - values[finite].min()) / cfg.temperature
    p = np.exp(logits)
    return ranked[int(rng.choice(len(ranked), p=p / p.sum()))][0]


def run_episode(
    env: Environment,
    cfg: ExperimentConfig,
    model: PomdpModel | None = None,
    prefs=None,
) -> list[StepRecord]:
    """Observe, infer, plan and act for ``cfg.steps_per_episode`` steps."""
    model = model or load_model(cfg.model_path)
    if prefs is None:
        prefs = load_prefs(cfg.prefs_path, model, cfg.horizon_depth)
    obs, acts, trace = [], [], []
    for step in range(cfg.steps_per_episode):
        state = env.true_state
        obs.append(env.observe())
        try:
            posterior = exact_filter_posterior(model, obs, acts).current
        except ZeroEvidence as exc:
            raise ZeroEvidence(step=step) from exc
        ranked = plan(model, posterior, prefs, cfg.horizon_depth, cfg.formulation)
        chosen = select_policy(ranked, cfg, env.rng)
        action = chosen.actions[0]
        env.step(action)
        acts.append(action)
        trace.append(StepRecord(step, obs[-1], posterior.probs.tolist(), ranked, chosen, action, state, env.true_state))
    return trace


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(x)
    return f"{float(x):.12g}"


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


@dataclass
class CheckTally:
    """Running maxima and violation counts of the identity and bound checks."""

    max_residual_roa_igpv: float = 0.0
    max_residual_rsa_e3: float = 0.0
    max_gap_error: float = 0.0
    max_bayes_residual: float = 0.0
    max_energy_residual: float = 0.0
    min_gap: float = math.inf
    bound_violations: int = 0
    identity_violations: int = 0
    infinite_entries: int = 0
    reports: int = 0

    def add(self, r: EfeReport):
        self.reports += 1
        self.max_bayes_residual = max(self.max_bayes_residual, r.bayes_residual)
        if not r.all_finite:
            self.infinite_entries += 1
            return
        gap_error = abs(r.gap - r.gap_oracle)
        self.max_residual_roa_igpv = max(self.max_residual_roa_igpv, r.residual_roa_igpv)
        self.max_residual_rsa_e3 = max(self.max_residual_rsa_e3, r.residual_rsa_e3)
        self.max_gap_error = max(self.max_gap_error, gap_error)
        self.max_energy_residual = max(self.max_energy_residual, r.energy_residual)
        self.min_gap = min(self.min_gap, r.gap)
        if r.gap < -BOUND_TOL:
            self.bound_violations += 1
        if max(r.residual_roa_igpv, r.residual_rsa_e3, gap_error, r.energy_residual) > IDENTITY_TOL:
            self.identity_violations += 1
        if r.bayes_residual > BAYES_TOL:
            self.identity_violations += 1

    @property
    def passed(self) -> bool:
        return self.bound_violations == 0 and self.identity_violations == 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["checks_passed"] = self.passed
        return d


def feasibility_summary(m: PomdpModel, prefs) -> list[dict]:
    out = []
    for p in prefs:
        c_o = m.likelihood_a @ as_probs(p)
        verdict = feasibility_check(m.likelihood_a, c_o)
        out.append({"state_prefs": as_probs(p).tolist(), "obs_prefs": c_o.tolist(), **verdict.to_dict()})
    return out


@dataclass
class ExperimentResult:
    csv_path: Path
    summary_path: Path
    summary: dict
    exit_code: int
    traces: list = field(default_factory=list)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every episode, write ``steps.csv`` and ``summary.json`` into ``cfg.output_dir``.

    ``exit_code`` is 2 when checks are enabled and an identity or bound check failed.
    """
    model = load_model(cfg.model_path)
    env_model = load_model(cfg.env_model_path) if cfg.env_model_path else model
    prefs = load_prefs(cfg.prefs_path, model, cfg.horizon_depth)
    rng = np.random.default_rng(int(cfg.seed))
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "steps.csv"
    summary_path = out_dir / "summary.json"

    tally = CheckTally()
    traces = []
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for episode in range(cfg.episodes):
            env = Environment.from_model(env_model, rng)
            trace = run_episode(env, cfg, model, prefs)
            traces.append(trace)
            for rec in trace:
                for pi, r in rec.ranked:
                    tally.add(r)
                    writer.writerow([
                        episode, rec.step, pi.label(),
                        *(_fmt(getattr(r, k)) for k in (
                            "roa", "igpv", "rsa", "e3", "gap",
                            "residual_roa_igpv", "residual_rsa_e3", "bayes_residual",
                        )),
                        int(pi == rec.chosen),
                    ])

    passed = tally.passed
    summary = {
        "config": cfg.to_dict(),
        "rng_algorithm": RNG_ALGORITHM,
        "policies_per_step": model.n_actions**cfg.horizon_depth,
        "steps_total": cfg.episodes * cfg.steps_per_episode,
        "checks": tally.to_dict(),
        "tolerances": {"identity": IDENTITY_TOL, "bound": BOUND_TOL, "bayes": BAYES_TOL},
        "preference_feasibility": feasibility_summary(model, prefs),
        "capability_table": CAPABILITY_TABLE,
        "numerical_confirmation": {
            "roa_equals_igpv": tally.max_residual_roa_igpv <= IDENTITY_TOL,
            "rsa_upper_bounds_roa": tally.bound_violations == 0,
            "rsa_equals_e3": tally.max_residual_rsa_e3 <= IDENTITY_TOL,
        },
        "episodes": [
            {"episode": i, "actions": [r.action for r in tr], "states": [r.true_state for r in tr] + [tr[-1].next_state]}
            for i, tr in enumerate(traces)
        ],
    }
    summary_path.write_text(json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    exit_code = 2 if cfg.checks_enabled and not passed else 0
    return ExperimentResult(csv_path, summary_path, summary, exit_code, traces)


def audit_model(
    m: PomdpModel,
    prefs,
    depth: int,
    n_random: int = 20,
    seed: int = 0,
) -> dict:
    """Run the unification checks for every policy from the prior and random posteriors."""
    rng = np.random.default_rng(seed)
    posteriors = [m.prior_d] + [rng.dirichlet(np.ones(m.n_states)) for _ in range(n_random)]
    tally = CheckTally()
    for q in posteriors:
        for _, r in plan(m, q, prefs, depth):
            tally.add(r)
    return {"posteriors": len(posteriors), "policies": m.n_actions**depth, **tally.to_dict()}


def _fixture(name: str) -> dict:
    return json.loads(resources.files("efekit.fixtures").joinpath(name).read_text(encoding="utf-8"))


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("efekit.fixtures").joinpath(name)))


def switch_world() -> tuple[PomdpModel, Categorical]:
    """Two states, identity observations, actions stay/switch; prefers state ``on``."""
    return model_from_dict(_fixture("switch_world.json")), Categorical(_fixture("switch_world_prefs.json")["state_prefs"])


def line_world() -> tuple[PomdpModel, Categorical]:
    """Four states on a line, noisy position readings, slippery left/stay/right moves."""
    return model_from_dict(_fixture("line_world.json")), Categorical(_fixture("line_world_prefs.json")["state_prefs"])
