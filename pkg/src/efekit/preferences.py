"""Compatibility of observation preferences with a likelihood mapping.

With a fixed likelihood ``A``, observation preferences can only be induced
from state preferences: ``C_o = A @ C_s``. The reachable ``C_o`` form the
convex hull of the columns of ``A``. Anything outside that hull has no
categorical ``C_s`` behind it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import DimMismatch
from .prob import VALIDATION_TOL, Categorical, as_probs

FEASIBILITY_TOL = 1e-8
SIMPLEX_TOL = 1e-9
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class FeasibilityVerdict:
    feasible: bool
    c_s: Categorical | None
    raw_solution: np.ndarray
    residual: float
    certificate: str
    method: str
    ill_conditioned: bool = False

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "c_s": None if self.c_s is None else self.c_s.probs.tolist(),
            "raw_solution": self.raw_solution.tolist(),
            "residual": self.residual,
            "method": self.method,
            "ill_conditioned": self.ill_conditioned,
            "certificate": self.certificate,
        }


def _likelihood(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimMismatch(f"likelihood must be a matrix, got shape {a.shape}")
    if np.any(a < 0) or np.any(np.abs(a.sum(axis=0) - 1.0) > VALIDATION_TOL):
        raise ValueError("likelihood columns must be probability vectors")
    return a


def observation_prefs_from_state_prefs(a, c_s) -> Categorical:
    a = _likelihood(a)
    c_s = as_probs(c_s)
    if c_s.shape != (a.shape[1],):
        raise DimMismatch(f"state preferences of length {c_s.size} for {a.shape[1]} states")
    c_o = a @ c_s
    return Categorical(c_o / c_o.sum())


def in_simplex(x, tol: float = SIMPLEX_TOL) -> bool:
    x = np.asarray(x, dtype=np.float64)
    return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)


def _project_to_simplex(x) -> Categorical:
    """Clamp tiny negatives and renormalize a vector already inside the tolerance band."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, None)
    return Categorical(x / x.sum())


def _segment_min_l1(a, c_o) -> tuple[float, np.ndarray]:
    """Two states: the objective is piecewise linear along the segment, so the
    minimum sits at an endpoint or where some residual component crosses zero."""
    lo, hi = a[:, 0], a[:, 1]
    diff = lo - hi
    cand = [0.0, 1.0]
    nz = np.abs(diff) > 0
    cand += [w for w in (c_o[nz] - hi[nz]) / diff[nz] if 0.0 < w < 1.0]
    best = min(cand, key=lambda w: np.abs(w * lo + (1 - w) * hi - c_o).sum())
    x = np.array([best, 1.0 - best])
    return float(np.abs(a @ x - c_o).sum()), x


def min_l1_residual(a, c_o) -> tuple[float, np.ndarray]:
    """min over the simplex of ||A x - c_o||_1.

    Solved exactly along the segment for two states, otherwise as a linear program.

    Variables are ``x`` (n_states) and slacks ``e`` (n_obs) with
    ``-e <= A x - c_o <= e``, ``sum x = 1``, ``x >= 0``.
    """
    a = np.asarray(a, dtype=np.float64)
    c_o = np.asarray(c_o, dtype=np.float64)
    m, n = a.shape
    if n == 2:
        return _segment_min_l1(a, c_o)
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    eye = np.eye(m)
    a_ub = np.block([[a, -eye], [-a, -eye]])
    b_ub = np.concatenate([c_o, -c_o])
    a_eq = np.concatenate([np.ones(n), np.zeros(m)])[None, :]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"simplex L1 program failed: {res.message}")
    x = res.x[:n]
    return float(np.abs(a @ x - c_o).sum()), x


def feasibility_check(a, c_o) -> FeasibilityVerdict:
    """Decide whether some categorical ``C_s`` satisfies ``A @ C_s = C_o``.

    Square, well-conditioned ``A`` is inverted directly, so the raw solution
    is the unique one. Otherwise the L1 distance from ``C_o`` to the image of
    the simplex is minimized and the residual decides.
    """
    a = _likelihood(a)
    c_o = as_probs(c_o)
    if c_o.shape != (a.shape[0],):
        raise DimMismatch(f"observation preferences of length {c_o.size} for {a.shape[0]} observations")
    square = a.shape[0] == a.shape[1]
    cond = float(np.linalg.cond(a)) if square else float("inf")
    ill = square and not cond <= MAX_CONDITION

    if square and not ill:
        raw = np.linalg.solve(a, c_o)
        if in_simplex(raw):
            c_s = _project_to_simplex(raw)
            residual = float(np.abs(a @ c_s.probs - c_o).sum())
            return FeasibilityVerdict(
                True, c_s, raw, residual,
                f"unique solution A^-1 C_o lies in the simplex (cond {cond:.3g})", "direct",
            )
        residual, _ = min_l1_residual(a, c_o)
        lo = raw.min()
        return FeasibilityVerdict(
            False, None, raw, residual,
            f"unique solution A^-1 C_o leaves the simplex (min entry {lo:.6g}, sum {raw.sum():.6g}); "
            f"L1 distance to the valid class {residual:.6g}",
            "direct",
        )

    residual, x = min_l1_residual(a, c_o)
    if residual <= FEASIBILITY_TOL and in_simplex(x):
        c_s = _project_to_simplex(x)
        residual = float(np.abs(a @ c_s.probs - c_o).sum())
        if residual <= FEASIBILITY_TOL:
            return FeasibilityVerdict(
                True, c_s, x, residual,
                f"simplex point reproduces C_o within {residual:.3g} (L1)", "l1-program", ill,
            )
    return FeasibilityVerdict(
        False, None, x, residual,
        f"L1 distance from C_o to the image of the simplex is {residual:.6g}", "l1-program", ill,
    )


def valid_class_vertices(a) -> list[Categorical]:
    """Columns of ``A``: the vertices of the hull of reachable observation preferences."""
    a = _likelihood(a)
    return [Categorical(a[:, s]) for s in range(a.shape[1])]
