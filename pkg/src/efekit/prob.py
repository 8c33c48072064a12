"""Dense categorical distributions and joint tables.

Everything here is exact enumeration over small finite domains. Natural
logarithms throughout, with the conventions ``0 ln 0 = 0`` and
``p ln(p / 0) = +inf`` for ``p > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    AllZero,
    InvalidDistribution,
    LengthMismatch,
    NegativeWeight,
    UnknownAxis,
    ZeroMassEvent,
)

VALIDATION_TOL = 1e-9
INTERNAL_TOL = 1e-12


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Categorical:
    """Probability vector over a finite domain."""

    probs: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size < 1:
            raise LengthMismatch(f"categorical needs a non-empty vector, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise InvalidDistribution("categorical entries must be finite")
        if np.any(p < 0):
            raise NegativeWeight(f"negative probability {p.min():g}")
        total = p.sum()
        if abs(total - 1.0) > VALIDATION_TOL:
            raise InvalidDistribution(f"probabilities sum to {total:.12g}, not 1")
        object.__setattr__(self, "probs", p)
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != p.size:
                raise LengthMismatch(f"{len(labels)} labels for {p.size} outcomes")
            object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)

    def __repr__(self) -> str:
        return f"Categorical({np.array2string(self.probs, precision=6)})"

    @classmethod
    def uniform(cls, n: int) -> "Categorical":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def one_hot(cls, n: int, index: int) -> "Categorical":
        p = np.zeros(n)
        p[index] = 1.0
        return cls(p)


def as_probs(p) -> np.ndarray:
    """Plain float array from a Categorical or array-like."""
    if isinstance(p, Categorical):
        return p.probs
    return np.asarray(p, dtype=np.float64)


def normalize(weights) -> Categorical:
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise NegativeWeight(f"negative weight {w.min():g}")
    total = w.sum()
    if total <= 0:
        raise AllZero("cannot normalize an all-zero weight vector")
    return Categorical(w / total)


def entropy(p) -> float:
    p = as_probs(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def kl_divergence(p, q) -> float:
    """KL[p || q] in nats; ``inf`` when p has mass outside the support of q."""
    p, q = as_probs(p), as_probs(q)
    if p.shape != q.shape:
        raise LengthMismatch(f"KL between shapes {p.shape} and {q.shape}")
    mask = p > 0
    if np.any(q[mask] <= 0):
        return float("inf")
    return float(np.sum(p[mask] * (np.log(p[mask]) - np.log(q[mask]))))


@dataclass(frozen=True, eq=False)
class JointTable:
    """Dense table over named discrete axes.

    ``values`` has one array dimension per axis, in ``axes`` order.
    """

    axes: tuple[tuple[str, int], ...]
    values: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        axes = tuple((str(name), int(size)) for name, size in self.axes)
        names = [name for name, _ in axes]
        if len(set(names)) != len(names):
            raise UnknownAxis(f"duplicate axis names in {names}")
        shape = tuple(size for _, size in axes)
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.size != int(np.prod(shape, dtype=np.int64)):
            raise LengthMismatch(f"{vals.size} values for axes of shape {shape}")
        vals = _frozen(vals.reshape(shape))
        if np.any(vals < 0):
            raise NegativeWeight("joint table has negative entries")
        if self.normalized and abs(vals.sum() - 1.0) > VALIDATION_TOL:
            raise InvalidDistribution(f"joint table sums to {vals.sum():.12g}, not 1")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.axes]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(size for _, size in self.axes)

    def axis_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownAxis(f"no axis named {name!r}; have {self.names}") from None

    def total(self) -> float:
        return float(self.values.sum())


def marginalize(t: JointTable, keep: Sequence[str]) -> JointTable:
    """Sum out every axis not in ``keep``; kept axes stay in their original order."""
    keep = set(keep)
    for name in keep:
        t.axis_index(name)
    drop = tuple(i for i, name in enumerate(t.names) if name not in keep)
    vals = t.values.sum(axis=drop) if drop else t.values
    axes = tuple(ax for ax in t.axes if ax[0] in keep)
    return JointTable(axes, vals, normalized=t.normalized)


def condition(t: JointTable, on: Mapping[str, int]) -> JointTable:
    """Slice ``t`` at the assignment ``on`` and renormalize: P(rest | on)."""
    index = [slice(None)] * len(t.axes)
    for name, value in on.items():
        i = t.axis_index(name)
        if not 0 <= value < t.axes[i][1]:
            raise IndexError(f"{name}={value} out of range")
        index[i] = value
    sliced = t.values[tuple(index)]
    mass = sliced.sum()
    if mass <= 0:
        raise ZeroMassEvent(f"assignment {dict(on)} has zero mass")
    axes = tuple(ax for ax in t.axes if ax[0] not in on)
    return JointTable(axes, sliced / mass)
