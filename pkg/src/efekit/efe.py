"""The four expected-free-energy formulations and their cross-checks.

Each formulation is evaluated from its own defining expression over the
materialized sequence joints, so agreement between them is a numerical
check of the identities rather than a consequence of shared code:

    roa == igpv <= rsa == e3

``roa`` is risk over observations plus ambiguity, ``igpv`` is negative
information gain minus pragmatic value, ``rsa`` is risk over states plus
ambiguity and ``e3`` is negative state entropy plus expected energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .predictive import ForecastDistribution, Policy, TargetDistribution
from .prob import entropy, kl_divergence, marginalize

INF = float("inf")
FORMULATIONS = ("roa", "igpv", "rsa", "e3")


def _obs_axes(depth):
    return [f"o_{k}" for k in range(1, depth + 1)]


def _state_axes(depth):
    return [f"s_{k}" for k in range(1, depth + 1)]


def _matrix(joint, depth) -> np.ndarray:
    """Joint as a (observation sequence, state sequence) matrix."""
    n_s = joint.axes[-1][1]
    return joint.values.reshape(-1, n_s**depth)


def _neg_expected_log(weights, target) -> float:
    """-sum w ln target over cells where w > 0; +inf if target vanishes there."""
    w = np.ravel(weights)
    q = np.ravel(target)
    mask = w > 0
    if np.any(q[mask] <= 0):
        return INF
    return float(-np.sum(w[mask] * np.log(q[mask])))


def _row_conditionals(mat: np.ndarray):
    """Rows of ``mat`` renormalized, restricted to rows with positive mass.

    Vectorized equivalent of conditioning the joint on each observation sequence.
    """
    mass = mat.sum(axis=1)
    rows = np.flatnonzero(mass > 0)
    return rows, mass[rows], mat[rows] / mass[rows, None]


def _check_pair(f: ForecastDistribution, t: TargetDistribution):
    if f.joint.axes != t.joint.axes:
        raise ValueError(f"forecast axes {f.joint.axes} differ from target axes {t.joint.axes}")


def ambiguity_per_step(f: ForecastDistribution) -> list[float]:
    """``E_{F(s_k)} H[A(. | s_k)]`` for each future step."""
    A = f.step_likelihood
    col_entropy = np.array([entropy(A[:, s]) for s in range(A.shape[1])])
    return [
        float(marginalize(f.joint, [f"s_{k}"]).values @ col_entropy) for k in range(1, f.depth + 1)
    ]


def efe_roa(f: ForecastDistribution, t: TargetDistribution) -> float:
    _check_pair(f, t)
    f_obs = marginalize(f.joint, _obs_axes(f.depth)).values
    t_obs = marginalize(t.joint, _obs_axes(t.depth)).values
    risk = kl_divergence(f_obs.ravel(), t_obs.ravel())
    return risk + sum(ambiguity_per_step(f))


def _info_gain_and_pragmatic(f, t):
    mat = _matrix(f.joint, f.depth)
    f_states = mat.sum(axis=0)
    rows, f_obs, post = _row_conditionals(mat)
    info_gain = float(sum(w * kl_divergence(p, f_states) for w, p in zip(f_obs, post)))
    t_obs = marginalize(t.joint, _obs_axes(t.depth)).values.ravel()
    pragmatic = -_neg_expected_log(mat.sum(axis=1), t_obs)
    return info_gain, pragmatic


def efe_igpv(f: ForecastDistribution, t: TargetDistribution) -> float:
    _check_pair(f, t)
    info_gain, pragmatic = _info_gain_and_pragmatic(f, t)
    return -info_gain - pragmatic


def _sequence_ambiguity(f) -> float:
    """``E_{F(s)} H[F(o | s)]`` from the joint, over whole sequences."""
    mat = _matrix(f.joint, f.depth)
    f_states = mat.sum(axis=0)
    mask = mat > 0
    cond = np.divide(mat, f_states[None, :], out=np.zeros_like(mat), where=mask)
    return float(-np.sum(mat[mask] * np.log(cond[mask])))


def efe_rsa(f: ForecastDistribution, t: TargetDistribution) -> float:
    _check_pair(f, t)
    f_states = marginalize(f.joint, _state_axes(f.depth)).values
    t_states = marginalize(t.joint, _state_axes(t.depth)).values
    return kl_divergence(f_states.ravel(), t_states.ravel()) + _sequence_ambiguity(f)


def efe_3e(f: ForecastDistribution, t: TargetDistribution) -> float:
    _check_pair(f, t)
    f_states = marginalize(f.joint, _state_axes(f.depth)).values
    expected_energy = -_neg_expected_log(f.joint.values, t.joint.values)
    return -entropy(f_states.ravel()) - expected_energy


def expected_kl_bound(f: ForecastDistribution, t: TargetDistribution) -> float:
    """``E_{F(o)} KL[F(s | o) || T(s | o)]``, the slack between rsa and roa."""
    _check_pair(f, t)
    f_mat = _matrix(f.joint, f.depth)
    t_mat = _matrix(t.joint, t.depth)
    rows, f_obs, f_post = _row_conditionals(f_mat)
    t_obs = t_mat.sum(axis=1)[rows]
    if np.any(t_obs <= 0):
        return INF
    t_post = t_mat[rows] / t_obs[:, None]
    return float(sum(w * kl_divergence(p, q) for w, p, q in zip(f_obs, f_post, t_post)))


def energy_decomposition(f: ForecastDistribution, t: TargetDistribution) -> tuple[float, float]:
    """Both sides of: -E_F[ln T(o, s)] = ambiguity - sum_k E_{F(s_k)}[ln C_s(s_k)]."""
    _check_pair(f, t)
    lhs = _neg_expected_log(f.joint.values, t.joint.values)
    state_surprise = 0.0
    for k, prefs in enumerate(t.state_prefs, start=1):
        state_surprise += _neg_expected_log(marginalize(f.joint, [f"s_{k}"]).values, prefs.probs)
    return lhs, sum(ambiguity_per_step(f)) + state_surprise


def bayes_ratio_residual(f: ForecastDistribution) -> float:
    """Max over positive-mass cells of |F(s)/F(s|o) - F(o)/F(o|s)|."""
    mat = _matrix(f.joint, f.depth)
    f_obs = mat.sum(axis=1, keepdims=True)
    f_states = mat.sum(axis=0, keepdims=True)
    rows, cols = np.nonzero(mat > 0)
    if rows.size == 0:
        return 0.0
    cell = mat[rows, cols]
    p_o, p_s = f_obs[rows, 0], f_states[0, cols]
    s_given_o = cell / p_o
    o_given_s = cell / p_s
    return float(np.max(np.abs(p_s / s_given_o - p_o / o_given_s)))


def _difference(x: float, y: float) -> float:
    if math.isinf(x) or math.isinf(y):
        return math.nan if x == y else (INF if x > y else -INF)
    return x - y


def _residual(x: float, y: float) -> float:
    if math.isinf(x) or math.isinf(y):
        return 0.0 if x == y else INF
    return abs(x - y)


@dataclass
class EfeReport:
    policy: Policy
    roa: float
    igpv: float
    rsa: float
    e3: float
    gap: float
    gap_oracle: float
    residual_roa_igpv: float
    residual_rsa_e3: float
    bayes_residual: float
    energy_residual: float
    infinite_flags: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def value(self, formulation: str) -> float:
        if formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {formulation!r}; choose from {FORMULATIONS}")
        return getattr(self, formulation)

    @property
    def all_finite(self) -> bool:
        return not any(self.infinite_flags.values())

    def to_dict(self) -> dict:
        return {
            "policy": list(self.policy.actions),
            **{name: getattr(self, name) for name in FORMULATIONS},
            "gap": self.gap,
            "gap_oracle": self.gap_oracle,
            "residual_roa_igpv": self.residual_roa_igpv,
            "residual_rsa_e3": self.residual_rsa_e3,
            "bayes_residual": self.bayes_residual,
            "energy_residual": self.energy_residual,
            "infinite_flags": dict(self.infinite_flags),
            "diagnostics": dict(self.diagnostics),
        }


def unification_report(f: ForecastDistribution, t: TargetDistribution, pi: Policy | None = None) -> EfeReport:
    """Evaluate all four formulations plus every cross-check for one policy.

    Infinite values are reported and flagged, never raised.
    """
    pi = pi or f.policy
    roa, igpv, rsa, e3 = efe_roa(f, t), efe_igpv(f, t), efe_rsa(f, t), efe_3e(f, t)
    lhs, rhs = energy_decomposition(f, t)
    info_gain, pragmatic = _info_gain_and_pragmatic(f, t)
    per_step_amb = ambiguity_per_step(f)
    per_step_risk = [
        kl_divergence(marginalize(f.joint, [f"s_{k}"]).values, p.probs)
        for k, p in enumerate(t.state_prefs, start=1)
    ]
    return EfeReport(
        policy=pi,
        roa=roa,
        igpv=igpv,
        rsa=rsa,
        e3=e3,
        gap=_difference(rsa, roa),
        gap_oracle=expected_kl_bound(f, t),
        residual_roa_igpv=_residual(roa, igpv),
        residual_rsa_e3=_residual(rsa, e3),
        bayes_residual=bayes_ratio_residual(f),
        energy_residual=_residual(lhs, rhs),
        infinite_flags={name: math.isinf(v) for name, v in zip(FORMULATIONS, (roa, igpv, rsa, e3))},
        diagnostics={
            "ambiguity": sum(per_step_amb),
            "ambiguity_per_step": per_step_amb,
            "state_risk_per_step": per_step_risk,
            "information_gain": info_gain,
            "pragmatic_value": pragmatic,
        },
    )
