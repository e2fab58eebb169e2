"""k-closure graphs and the equivalence relations built on them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .graphs import ARROW, DAG, TAIL, MixedGraph, PMG, _bits
from .separation import COVERED, _separated_idx, clamp_k, find_sepset_upto_k, separation_statements

__all__ = [
    "KClosure",
    "ClosureCheck",
    "construct_k_closure",
    "is_valid_k_closure",
    "is_maximal",
    "discriminating_paths",
    "mag_markov_equivalent",
    "kclosure_equivalent",
    "equivalence_key",
    "k_markov_equivalent",
    "k_markov_equivalent_direct",
    "markov_equivalent_dags",
]


@dataclass(frozen=True)
class KClosure:
    graph: MixedGraph
    k: int
    source: DAG | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ClosureCheck:
    """Outcome of :func:`is_valid_k_closure`.

    ``reason`` is one of ``NotMixed``, ``NotAncestral``, ``NotMaximal`` or
    ``BidirectedSeparable``; ``pair`` and ``witness`` locate the failure.
    """

    valid: bool
    reason: str | None = None
    pair: tuple[str, str] | None = None
    witness: frozenset[str] | None = None

    def __bool__(self) -> bool:
        return self.valid

    def describe(self) -> str:
        if self.valid:
            return "valid: true"
        detail = ""
        if self.pair:
            detail = ",".join(self.pair)
            if self.witness is not None:
                detail += "; {" + ",".join(sorted(self.witness)) + "}"
            detail = f"({detail})"
        return f"valid: false, reason: {self.reason}{detail}"


@lru_cache(maxsize=200_000)
def _closure_cached(d: DAG, k: int) -> MixedGraph:
    n = d.n
    anc = [d.ancestors_mask(1 << v) & ~(1 << v) for v in range(n)]
    edges = list(d.edges())
    for i, j in itertools.combinations(range(n), 2):
        if d.m[i][j]:
            continue
        if find_sepset_upto_k(d, i, j, k) is not COVERED:
            continue
        if anc[j] >> i & 1:
            edges.append((i, j, TAIL, ARROW))
        elif anc[i] >> j & 1:
            edges.append((i, j, ARROW, TAIL))
        else:
            edges.append((i, j, ARROW, ARROW))
    return MixedGraph(d.names, edges)


def construct_k_closure(d: DAG, k: int) -> KClosure:
    """k-closure of ``d``: edges of ``d`` kept, each non-adjacent k-covered pair joined
    by ``->``, ``<-`` or ``<->`` according to ancestry in ``d``."""
    if not isinstance(d, DAG):
        d = DAG(d.names, d.edges())
    k = clamp_k(k, d.n)
    return KClosure(_closure_cached(d, k), k, d)


def _graph(x) -> MixedGraph:
    return x.graph if isinstance(x, KClosure) else x


def is_maximal(g: PMG) -> tuple[bool, tuple[int, int] | None]:
    """Every non-adjacent pair is separated by some subset of the other vertices."""
    n = g.n
    for i, j in itertools.combinations(range(n), 2):
        if g.m[i][j]:
            continue
        rest = [v for v in range(n) if v != i and v != j]
        if not any(_separated_idx(g, i, j, sum(1 << v for v in c))
                   for size in range(len(rest) + 1)
                   for c in itertools.combinations(rest, size)):
            return False, (i, j)
    return True, None


def is_valid_k_closure(g: PMG, k: int) -> ClosureCheck:
    """Characterisation of k-closure graphs: an ancestral, maximal mixed graph in
    which no bidirected edge, once removed, leaves its endpoints separable by a
    set of at most ``k`` vertices."""
    g = _graph(g)
    names = g.names
    if not isinstance(g, MixedGraph):
        try:
            g = MixedGraph(g.names, g.edges())
        except ValueError:
            return ClosureCheck(False, "NotMixed")
    if not g.is_ancestral():
        return ClosureCheck(False, "NotAncestral")
    ok, pair = is_maximal(g)
    if not ok:
        return ClosureCheck(False, "NotMaximal", (names[pair[0]], names[pair[1]]))
    for i, j in g.bidirected_edges():
        h = g.without_edge(i, j)
        found = find_sepset_upto_k(h, i, j, k)
        if found is not COVERED:
            return ClosureCheck(False, "BidirectedSeparable", (names[i], names[j]),
                                frozenset(names[v] for v in found))
    return ClosureCheck(True)


def _is_parent(m, x: int, y: int) -> bool:
    return m[x][y] == ARROW and m[y][x] == TAIL


def discriminating_paths(g: PMG) -> list[tuple[int, ...]]:
    """All discriminating paths ``(x, z1, ..., zm, u, Y, v)`` of ``g``.

    ``x`` and ``v`` are non-adjacent; every vertex strictly between ``x`` and ``Y``
    is a collider on the path and a parent of ``v``.
    """
    m = g.m
    n = g.n
    out = []

    def extend(path: list[int]) -> None:
        # path runs backwards: [v, Y, u, ..., w]; w is a collider-parent of v
        w = path[-1]
        v = path[0]
        for p in range(n):
            if not m[p][w] or m[p][w] != ARROW or p in path:
                continue
            if not m[p][v]:
                out.append(tuple(reversed(path + [p])))
            elif _is_parent(m, p, v):
                # p becomes an interior collider; needs an arrowhead at p from w's side
                if m[w][p] == ARROW:
                    path.append(p)
                    extend(path)
                    path.pop()

    for v in range(n):
        for y in range(n):
            if not m[y][v]:
                continue
            for u in range(n):
                if u in (v, y) or not m[u][y] or not _is_parent(m, u, v):
                    continue
                # u must be a collider: arrowhead at u from Y
                if m[y][u] != ARROW:
                    continue
                extend([v, y, u])
    return out


def _collider_on(m, path: tuple[int, ...]) -> bool:
    u, y, v = path[-3], path[-2], path[-1]
    return m[u][y] == ARROW and m[v][y] == ARROW


def mag_markov_equivalent(m1, m2) -> bool:
    """Markov equivalence of two MAGs: same skeleton, same unshielded colliders,
    and the same collider status of ``Y`` on every path that discriminates ``Y``
    in both graphs."""
    g1, g2 = _graph(m1), _graph(m2)
    for g in (g1, g2):
        if not g.is_ancestral():
            raise ValueError("input is not an ancestral graph")
    if g1.names != g2.names:
        if set(g1.names) != set(g2.names):
            return False
        g2 = g2.reordered(g1.names)
    if g1.skeleton() != g2.skeleton():
        return False
    if g1.unshielded_colliders() != g2.unshielded_colliders():
        return False
    p2 = set(discriminating_paths(g2))
    for p in discriminating_paths(g1):
        if p in p2 and _collider_on(g1.m, p) != _collider_on(g2.m, p):
            return False
    return True


def equivalence_key(g) -> tuple:
    """Skeleton plus unshielded colliders, by vertex name; equal keys mean
    Markov-equivalent k-closures."""
    g = _graph(g)
    return (g.named_skeleton(), g.named_unshielded_colliders())


def kclosure_equivalent(k1, k2) -> bool:
    """Markov equivalence of two k-closures: skeleton and unshielded colliders agree."""
    if isinstance(k1, KClosure) and isinstance(k2, KClosure) and k1.k != k2.k:
        raise ValueError("closures were built with different bounds")
    return equivalence_key(k1) == equivalence_key(k2)


def _check_vertices(d1: PMG, d2: PMG) -> None:
    if set(d1.names) != set(d2.names):
        raise ValueError("DAGs are on different vertex sets")


def k_markov_equivalent(d1: DAG, d2: DAG, k: int) -> bool:
    """Same degree-k separations, decided through the k-closures."""
    _check_vertices(d1, d2)
    return kclosure_equivalent(construct_k_closure(d1, k), construct_k_closure(d2, k))


@lru_cache(maxsize=200_000)
def _named_statements(g: PMG, k: int) -> frozenset:
    names = g.names
    return frozenset((*sorted((names[i], names[j])), frozenset(names[v] for v in c))
                     for i, j, c in separation_statements(g, k))


def k_markov_equivalent_direct(d1: DAG, d2: DAG, k: int, *, witness: bool = False):
    """Same degree-k separations, checked statement by statement.

    With ``witness=True`` returns ``(equal, statement)`` where ``statement`` is a
    separation ``(a, b, cond)`` holding in exactly one of the graphs.
    """
    _check_vertices(d1, d2)
    k = clamp_k(k, d1.n)
    s1, s2 = _named_statements(d1, k), _named_statements(d2, k)
    if not witness:
        return s1 == s2
    diff = sorted(s1 ^ s2, key=lambda s: (len(s[2]), s[0], s[1], sorted(s[2])))
    return (not diff, diff[0] if diff else None)


def markov_equivalent_dags(d1: DAG, d2: DAG) -> bool:
    """Classical DAG equivalence: same skeleton and unshielded colliders."""
    _check_vertices(d1, d2)
    return equivalence_key(d1) == equivalence_key(d2)
