"""Command-line entry point: ``efekit {plan,run,check,prefcheck,dsep}``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import agent
from .dsep import active_trail
from .efe import FORMULATIONS
from .errors import EfeKitError
from .model import Dag, load_model
from .predictive import load_prefs
from .preferences import feasibility_check, valid_class_vertices
from .prob import Categorical


def _vector(text: str) -> list[float]:
    text = text.strip()
    if text.startswith("["):
        return [float(v) for v in json.loads(text)]
    return [float(v) for v in text.split(",")]


def _names(text: str | None) -> list[str]:
    return [v for v in (text or "").split(",") if v]


def _likelihood(text: str) -> np.ndarray:
    """A JSON matrix literal or a model file (its ``likelihood_a`` is used)."""
    if text.strip().startswith("["):
        return np.array(json.loads(text), dtype=np.float64)
    doc = json.loads(Path(text).read_text(encoding="utf-8"))
    return np.array(doc["likelihood_a"] if isinstance(doc, dict) else doc, dtype=np.float64)


def _num(x: float) -> str:
    return f"{x:.6g}"


def cmd_plan(args) -> int:
    m = load_model(args.model)
    prefs = load_prefs(args.prefs, m, args.depth)
    posterior = Categorical(_vector(args.posterior)) if args.posterior else m.prior
    ranked = agent.plan(m, posterior, prefs, args.depth, args.formulation)
    if args.json:
        print(json.dumps(agent._json_safe([r.to_dict() for _, r in ranked]), indent=2))
        return 0
    print(f"ranking by {args.formulation}; posterior {posterior.probs.tolist()}")
    labels = ["-".join(m.actions[a] for a in pi.actions) for pi, _ in ranked]
    w = max(len("policy"), *map(len, labels))
    print(f"{'rank':>4}  {'policy':<{w}}" + "".join(f"{k:>12}" for k in (*FORMULATIONS, "gap")))
    for i, ((pi, r), names) in enumerate(zip(ranked, labels)):
        print(f"{i:>4}  {names:<{w}}" + "".join(f"{_num(getattr(r, k)):>12}" for k in (*FORMULATIONS, "gap")))
    return 0


def cmd_run(args) -> int:
    cfg = agent.ExperimentConfig.from_file(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    result = agent.run_experiment(cfg)
    checks = result.summary["checks"]
    print(f"wrote {result.csv_path} and {result.summary_path}")
    print(
        f"max |roa-igpv| {_num(checks['max_residual_roa_igpv'])}, max |rsa-e3| {_num(checks['max_residual_rsa_e3'])}, "
        f"bound violations {checks['bound_violations']}, checks {'passed' if checks['checks_passed'] else 'FAILED'}"
    )
    return result.exit_code


def cmd_check(args) -> int:
    m = load_model(args.model)
    prefs = load_prefs(args.prefs, m, args.depth)
    audit = agent.audit_model(m, prefs, args.depth, n_random=args.trials, seed=args.seed)
    if args.json:
        print(json.dumps(agent._json_safe(audit), indent=2, sort_keys=True))
    else:
        for key, value in audit.items():
            print(f"{key:>24}: {value}")
    return 0 if audit["checks_passed"] else 2


def cmd_prefcheck(args) -> int:
    a = _likelihood(args.likelihood)
    c_o = _vector(args.c_obs)
    verdict = feasibility_check(a, c_o)
    vertices = [v.probs.tolist() for v in valid_class_vertices(a)]
    if args.json:
        print(json.dumps({**verdict.to_dict(), "vertices": vertices}, indent=2))
    else:
        print(f"feasible:     {verdict.feasible}")
        print(f"raw solution: {[_num(x) for x in verdict.raw_solution]}")
        if verdict.c_s is not None:
            print(f"C_s:          {[_num(x) for x in verdict.c_s.probs]}")
        print(f"residual:     {verdict.residual:.3g}")
        print(f"method:       {verdict.method}{' (ill-conditioned)' if verdict.ill_conditioned else ''}")
        print(f"vertices:     {vertices}")
        print(verdict.certificate)
    return 0 if verdict.feasible else 1


def cmd_dsep(args) -> int:
    g = Dag.from_dict(json.loads(Path(args.dag).read_text(encoding="utf-8")))
    witness = active_trail(g, _names(args.x), _names(args.y), _names(args.given))
    if args.json:
        print(json.dumps({"d_separated": witness is None, "witness": list(witness) if witness else None}))
    elif witness is None:
        print("d-separated")
    else:
        print("not d-separated; active trail: " + " - ".join(witness))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="efekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="rank every policy by expected free energy")
    p.add_argument("--model", required=True)
    p.add_argument("--prefs", required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--formulation", choices=FORMULATIONS, default="roa")
    p.add_argument("--posterior", help="current state belief, e.g. 0.5,0.5 (default: model prior)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("config")
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check", help="audit the unification identities on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--prefs", required=True)
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--trials", type=int, default=20, help="random posteriors on top of the prior")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("prefcheck", help="can these observation preferences be induced by state preferences?")
    p.add_argument("--likelihood", required=True, help="JSON matrix literal or model file")
    p.add_argument("--c-obs", required=True, help="observation preferences, e.g. 0.8,0.2")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prefcheck)

    p = sub.add_parser("dsep", help="d-separation query on a DAG file")
    p.add_argument("--dag", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--given", default="")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_dsep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EfeKitError, OSError, KeyError) as exc:
        print(f"efekit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
