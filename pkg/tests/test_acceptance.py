"""Exit criteria, each at its stated tolerance.

Run ``pytest tests/test_acceptance.py`` to get one PASS/FAIL line per
criterion in the terminal summary.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS, EQ8_A
from efekit.agent import Environment, ExperimentConfig, enumerate_policies, fixture_path, run_episode, run_experiment, switch_world
from efekit.dsep import d_separated
from efekit.efe import unification_report
from efekit.inference import exact_filter_posterior, log_evidence, variational_free_energy
from efekit.model import Dag, PomdpModel, to_dag
from efekit.predictive import build_forecast, build_target
from efekit.preferences import feasibility_check
from oracles import grid_min_l1, random_categorical, random_dag, random_model_arrays, reachable_d_separated
from test_dsep import _random_query, brute_joint, ci_residual

POPULATION_SEED = 20240601
N_MODELS = 500


def record(key, passed, detail):
    ACCEPTANCE_RESULTS[key] = (bool(passed), detail)
    assert passed, detail


@pytest.fixture(scope="module")
def population():
    """500 random models, every policy scored; entries of D, A, B, C_s and the posterior >= 0.01."""
    rng = np.random.default_rng(POPULATION_SEED)
    start = time.perf_counter()
    reports = []
    for _ in range(N_MODELS):
        n_s, n_o = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        n_a, depth = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        m = PomdpModel(*random_model_arrays(rng, n_s, n_o, n_a))
        q = random_categorical(rng, n_s)
        prefs = [random_categorical(rng, n_s) for _ in range(depth)]
        for pi in enumerate_policies(n_a, depth):
            reports.append(unification_report(build_forecast(m, q, pi), build_target(m, prefs, pi)))
    return reports, time.perf_counter() - start


def test_1_counterexample():
    feasibility_check(EQ8_A, [0.8, 0.2])
    timings = []
    for _ in range(20):
        t0 = time.perf_counter()
        v = feasibility_check(EQ8_A, [0.8, 0.2])
        timings.append(time.perf_counter() - t0)
    err = float(np.abs(v.raw_solution - np.array([2.0, -1.0])).max())
    runtime = float(np.median(timings))
    record(
        "1 counterexample",
        (not v.feasible) and v.method == "direct" and err <= 1e-12 and runtime < 1e-3,
        f"feasible={v.feasible}, raw={v.raw_solution.tolist()}, |raw-[2,-1]|={err:.1e}, median runtime {runtime * 1e3:.3f} ms",
    )


def test_2_roa_equals_igpv(population):
    reports, elapsed = population
    worst = max(r.residual_roa_igpv for r in reports if r.all_finite)
    record(
        "2 roa=igpv",
        worst <= 1e-8 and elapsed < 30,
        f"{N_MODELS} models / {len(reports)} policies, max |roa-igpv| = {worst:.2e}, {elapsed:.1f} s",
    )


def test_3_upper_bound_and_gap(population):
    reports, _ = population
    min_gap = min(r.rsa - r.roa for r in reports)
    worst = max(abs(r.gap - r.gap_oracle) for r in reports)
    record(
        "3 rsa>=roa, gap identity",
        min_gap >= -1e-10 and worst <= 1e-8,
        f"min(rsa-roa) = {min_gap:.2e}, max |gap-gap_oracle| = {worst:.2e}",
    )


def test_4_rsa_equals_3e(population):
    reports, _ = population
    worst = max(r.residual_rsa_e3 for r in reports)
    record("4 rsa=e3", worst <= 1e-8, f"max |rsa-e3| = {worst:.2e}")


def test_5_energy_decomposition(population):
    reports, _ = population
    worst = max(r.energy_residual for r in reports)
    record("5 energy decomposition", worst <= 1e-8, f"max residual = {worst:.2e}")


def test_6_bayes_ratio(population):
    reports, _ = population
    worst = max(r.bayes_residual for r in reports)
    record("6 bayes ratio", worst <= 1e-9, f"max residual = {worst:.2e}")


def test_7_vfe_evidence():
    rng = np.random.default_rng(7)
    exact_worst, bound_worst = 0.0, math.inf
    for _ in range(100):
        n_s, n_o = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        m = PomdpModel(*random_model_arrays(rng, n_s, n_o, 1))
        obs = [int(rng.integers(n_o))]
        logz = log_evidence(m, obs, [])
        q = exact_filter_posterior(m, obs, [])
        exact_worst = max(exact_worst, abs(variational_free_energy(m, q, obs, []) + logz))
        for _ in range(5):
            q_bad = [random_categorical(rng, n_s, floor=0.0)]
            bound_worst = min(bound_worst, variational_free_energy(m, q_bad, obs, []) + logz)
    record(
        "7 vfe/evidence",
        exact_worst <= 1e-9 and bound_worst >= -1e-9,
        f"max |F(q*)+ln Z| = {exact_worst:.2e}, min F(q)+ln Z over random q = {bound_worst:.2e}",
    )


def test_8_feasibility_round_trip():
    rng = np.random.default_rng(8)
    worst, failures = 0.0, 0
    for _ in range(500):
        n_o, n_s = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        a = random_categorical(rng, n_o, floor=0.0, size=n_s).T
        x = random_categorical(rng, n_s, floor=0.0)
        v = feasibility_check(a, a @ x)
        if not v.feasible:
            failures += 1
            continue
        worst = max(worst, float(np.abs(a @ v.c_s.probs - a @ x).sum()))
    disagreements, compared = 0, 0
    while compared < 300:
        a = random_categorical(rng, 2, floor=0.0, size=2).T
        c_o = random_categorical(rng, 2, floor=0.0)
        if abs(np.linalg.det(a)) < 1e-3:
            continue
        raw = np.linalg.solve(a, c_o)
        if np.abs(raw).min() < 0.02:
            continue  # boundary case: inside the grid's resolution
        compared += 1
        disagreements += feasibility_check(a, c_o).feasible != (grid_min_l1(a, c_o) <= 5e-3)
    record(
        "8 feasibility round trip",
        failures == 0 and worst <= 1e-8 and disagreements == 0,
        f"500 round trips: {failures} rejected, max obs residual {worst:.1e}; grid oracle disagreements {disagreements}/{compared}",
    )


def test_9_d_separation():
    rng = np.random.default_rng(9)
    disagreements = 0
    for _ in range(1000):
        nodes, edges = random_dag(rng, int(rng.integers(2, 8)), rng.uniform(0.1, 0.8))
        g = Dag(tuple(nodes), tuple(edges))
        x, y, s = _random_query(rng, nodes) if len(nodes) > 2 else ({nodes[0]}, {nodes[1]}, set())
        disagreements += d_separated(g, x, y, s) != reachable_d_separated(nodes, edges, x, y, s)
    pomdp_ok = all(
        d_separated(to_dag(None, t, d), {f"o_{t + 1}"}, {f"a_{t}"}, {f"s_{t + 1}"})
        for t in range(4) for d in range(1, 4)
    )
    worst, separated = 0.0, 0
    for _ in range(300):
        nodes, edges = random_dag(rng, int(rng.integers(3, 6)), rng.uniform(0.2, 0.7))
        g = Dag(tuple(nodes), tuple(edges))
        x, y, s = _random_query(rng, nodes)
        if d_separated(g, x, y, s):
            separated += 1
            worst = max(worst, ci_residual(g, brute_joint(rng, g), sorted(x), sorted(y), sorted(s)))
    record(
        "9 d-separation",
        disagreements == 0 and pomdp_ok and worst <= 1e-9,
        f"{disagreements}/1000 disagreements with reachability; POMDP queries ok={pomdp_ok}; "
        f"CI residual {worst:.1e} over {separated} separated queries",
    )


def test_10_planner(tmp_path):
    doc = json.loads(fixture_path("switch_world_config.json").read_text())
    doc["output_dir"] = str(tmp_path / "run")
    cfg = ExperimentConfig.from_dict(doc, base_dir=fixture_path("switch_world_config.json").parent)
    assert cfg.steps_per_episode == 20 and cfg.action_selection == "argmin"
    m, prefs = switch_world()
    env = Environment.from_model(m, np.random.default_rng(cfg.seed))
    trace = run_episode(env, cfg, m, [prefs])
    preferred = int(np.argmax(prefs.probs))
    # the preference-seeking action is the one whose transition lands in the preferred state
    seeking = [int(np.argmax(m.transitions_b[r.action][:, r.true_state])) == preferred for r in trace]
    first = run_experiment(cfg)
    csv_bytes = first.csv_path.read_bytes()
    second = run_experiment(cfg)
    identical = second.csv_path.read_bytes() == csv_bytes
    record(
        "10 planner",
        all(seeking) and identical and first.exit_code == 0,
        f"preference-seeking on {sum(seeking)}/{len(trace)} steps; CSV byte-identical across runs: {identical}",
    )
