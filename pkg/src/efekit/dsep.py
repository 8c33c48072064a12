"""d-separation by exhaustive enumeration of simple trails."""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .errors import InvalidTrail, OverlappingSets
from .model import Dag


def _check_trail(g: Dag, trail: Sequence[str]) -> tuple[str, ...]:
    trail = tuple(trail)
    if len(trail) < 2:
        raise InvalidTrail("a trail needs at least two vertices")
    if len(set(trail)) != len(trail):
        raise InvalidTrail(f"trail {trail} repeats a vertex")
    edges = set(g.edges)
    for u, v in zip(trail, trail[1:]):
        if (u, v) not in edges and (v, u) not in edges:
            raise InvalidTrail(f"{u} and {v} are not adjacent")
    return trail


def is_collider(g: Dag, trail: Sequence[str], j: int) -> bool:
    """Whether ``trail[j]`` has both trail neighbours pointing into it."""
    if j <= 0 or j >= len(trail) - 1:
        return False
    v = trail[j]
    return trail[j - 1] in g.parents[v] and trail[j + 1] in g.parents[v]


def trail_blocked(g: Dag, trail: Sequence[str], s: Iterable[str]) -> bool:
    """Blocked iff an interior collider is outside ``s`` with no descendant in
    ``s``, or an interior non-collider is in ``s``."""
    trail = _check_trail(g, trail)
    s = set(s)
    for j in range(1, len(trail) - 1):
        v = trail[j]
        if is_collider(g, trail, j):
            if v not in s and not (g.descendants(v) & s):
                return True
        elif v in s:
            return True
    return False


def simple_trails(g: Dag, start: str, end: str) -> Iterator[tuple[str, ...]]:
    """Every simple trail from ``start`` to ``end``, ignoring edge direction."""
    neighbours = {v: g.parents[v] | g.children[v] for v in g.nodes}

    def extend(path, on_path):
        tail = path[-1]
        if tail == end:
            yield tuple(path)
            return
        for nxt in sorted(neighbours[tail]):
            if nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                yield from extend(path, on_path)
                on_path.discard(nxt)
                path.pop()

    yield from extend([start], {start})


def _as_set(g: Dag, vs) -> set[str]:
    vs = {vs} if isinstance(vs, str) else set(vs)
    unknown = vs - set(g.nodes)
    if unknown:
        raise KeyError(f"unknown vertices {sorted(unknown)}")
    return vs


def active_trail(g: Dag, x, y, s=()) -> tuple[str, ...] | None:
    """An unblocked trail between ``x`` and ``y`` given ``s``, or None if d-separated."""
    x, y, s = _as_set(g, x), _as_set(g, y), _as_set(g, s)
    if x & y or x & s or y & s:
        raise OverlappingSets("x, y and s must be pairwise disjoint")
    for v1 in sorted(x):
        for v2 in sorted(y):
            for trail in simple_trails(g, v1, v2):
                if not trail_blocked(g, trail, s):
                    return trail
    return None


def d_separated(g: Dag, x, y, s=()) -> bool:
    return active_trail(g, x, y, s) is None
