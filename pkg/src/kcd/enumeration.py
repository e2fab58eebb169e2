"""Brute-force oracles over DAG space and MAG orientations.

These are exhaustive and only meant for small graphs; they give ground truth
for the learners.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from enum import Enum
from functools import lru_cache
from types import SimpleNamespace
from typing import Iterable, Iterator

from .closure import (_closure_cached, _collider_on, discriminating_paths, equivalence_key,
                      is_maximal)
from .graphs import ARROW, CIRCLE, DAG, TAIL, Mark, MixedGraph, PMG, _bits
from .separation import clamp_k, separation_statements

__all__ = [
    "EdgeType",
    "DEFAULT_DAG_CAP",
    "HARD_DAG_CAP",
    "OracleBudgetError",
    "enumerate_dags",
    "count_dags",
    "edge_union",
    "k_essential_oracle",
    "k_equivalence_class",
    "essential_graph_oracle",
    "pag_oracle",
    "markov_equivalent_mags",
    "pmg_subset",
]

DEFAULT_DAG_CAP = 5
HARD_DAG_CAP = 6
DEFAULT_PAG_EDGE_CAP = 12


class OracleBudgetError(ValueError):
    """Raised when an exhaustive oracle is asked for more than its cap allows."""


class EdgeType(Enum):
    RIGHT = "->"
    LEFT = "<-"
    BI = "<->"


_UNION = {
    frozenset({EdgeType.RIGHT}): (TAIL, ARROW),
    frozenset({EdgeType.LEFT}): (ARROW, TAIL),
    frozenset({EdgeType.BI}): (ARROW, ARROW),
    frozenset({EdgeType.RIGHT, EdgeType.LEFT}): (TAIL, TAIL),
    frozenset({EdgeType.RIGHT, EdgeType.BI}): (CIRCLE, ARROW),
    frozenset({EdgeType.LEFT, EdgeType.BI}): (ARROW, CIRCLE),
    frozenset({EdgeType.RIGHT, EdgeType.LEFT, EdgeType.BI}): (CIRCLE, CIRCLE),
}


def edge_union(types: Iterable[EdgeType]) -> tuple[Mark, Mark]:
    """Marks ``(at_u, at_v)`` for the union of edge types seen between ``u`` and ``v``.

    ``->`` and ``<-`` together give an undirected edge, not circles; adding
    ``<->`` to a direction turns its tail into a circle.
    """
    s = frozenset(EdgeType(t) for t in types)
    if not s:
        raise ValueError("edge union of an empty set")
    return _UNION[s]


def _edge_type(mi: int, mj: int) -> EdgeType:
    if mi == ARROW and mj == ARROW:
        return EdgeType.BI
    return EdgeType.RIGHT if mj == ARROW else EdgeType.LEFT


def _check_cap(n: int, cap: int) -> None:
    if cap > HARD_DAG_CAP:
        raise OracleBudgetError(f"DAG enumeration cap cannot exceed {HARD_DAG_CAP}")
    if n > cap:
        raise OracleBudgetError(
            f"n={n} exceeds the DAG enumeration cap {cap} (raise it with --max-n, hard cap {HARD_DAG_CAP})")


def _arc_sets(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    pairs = list(itertools.combinations(range(n), 2))
    par = [0] * n
    arcs: list[tuple[int, int]] = []

    def reaches(src: int, dst: int) -> bool:
        # is dst an ancestor-or-self of src, following parent masks
        seen = 1 << src
        frontier = 1 << src
        while frontier:
            if frontier >> dst & 1:
                return True
            nxt = 0
            f = frontier
            while f:
                low = f & -f
                nxt |= par[low.bit_length() - 1]
                f ^= low
            frontier = nxt & ~seen
            seen |= frontier
        return False

    def rec(t: int):
        if t == len(pairs):
            yield tuple(arcs)
            return
        i, j = pairs[t]
        yield from rec(t + 1)
        for u, v in ((i, j), (j, i)):
            if not reaches(u, v):
                par[v] |= 1 << u
                arcs.append((u, v))
                yield from rec(t + 1)
                arcs.pop()
                par[v] &= ~(1 << u)

    yield from rec(0)


def _default_names(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(n))


@lru_cache(maxsize=None)
def _census(n: int) -> tuple[DAG, ...]:
    names = _default_names(n)
    return tuple(DAG(names, arcs) for arcs in _arc_sets(n))


def enumerate_dags(n: int, names=None, *, max_n: int = DEFAULT_DAG_CAP) -> Iterator[DAG]:
    """Every labelled DAG on ``n`` vertices, each exactly once."""
    _check_cap(n, max_n)
    if names is None:
        yield from _census(n)
        return
    names = tuple(names)
    if len(names) != n:
        raise ValueError("need one name per vertex")
    for d in _census(n):
        yield DAG(names, d.edges())


def count_dags(n: int) -> int:
    """Number of labelled DAGs on ``n`` vertices (Robinson's recurrence)."""
    from math import comb

    a = [1]
    for m in range(1, n + 1):
        a.append(sum((-1) ** (i + 1) * comb(m, i) * 2 ** (i * (m - i)) * a[m - i]
                     for i in range(1, m + 1)))
    return a[n]


def _index_key(g) -> tuple:
    return (g.skeleton(), g.unshielded_colliders())


@lru_cache(maxsize=None)
def _classes(n: int, k: int, direct: bool) -> dict:
    groups: dict = defaultdict(list)
    for d in _census(n):
        if direct:
            key = separation_statements(d, k)
        else:
            key = _index_key(_closure_cached(d, k))
        groups[key].append(d)
    return dict(groups)


def k_equivalence_class(d: DAG, k: int, *, direct: bool = False,
                        max_n: int = DEFAULT_DAG_CAP) -> list[DAG]:
    """All DAGs on ``d``'s vertices that are k-Markov equivalent to ``d``.

    Grouping goes through k-closures unless ``direct`` is set, in which case the
    degree-k separation statements themselves are compared.
    """
    _check_cap(d.n, max_n)
    k = clamp_k(k, d.n)
    probe = DAG(_default_names(d.n), d.edges())
    key = separation_statements(probe, k) if direct else _index_key(_closure_cached(probe, k))
    members = _classes(d.n, k, direct)[key]
    return [DAG(d.names, x.edges()) for x in members]


def _union_of(graphs: Iterable[PMG], names) -> PMG:
    seen: dict[tuple[int, int], set] = defaultdict(set)
    skeleton = None
    for g in graphs:
        sk = g.skeleton()
        if skeleton is None:
            skeleton = sk
        elif sk != skeleton:
            raise AssertionError("equivalent graphs with different skeletons")
        for i, j, mi, mj in g.edges():
            seen[i, j].add(_edge_type(mi, mj))
    edges = [(i, j, *edge_union(ts)) for (i, j), ts in sorted(seen.items())]
    return PMG(names, edges)


def k_essential_oracle(d: DAG, k: int, *, direct: bool = False,
                       max_n: int = DEFAULT_DAG_CAP) -> PMG:
    """k-essential graph: edge union of the k-closures of every DAG k-Markov
    equivalent to ``d``."""
    _check_cap(d.n, max_n)
    k = clamp_k(k, d.n)
    probe = DAG(_default_names(d.n), d.edges())
    key = separation_statements(probe, k) if direct else _index_key(_closure_cached(probe, k))
    return _class_union(d.n, k, direct, key).relabel(d.names)


@lru_cache(maxsize=None)
def _class_union(n: int, k: int, direct: bool, key) -> PMG:
    members = _classes(n, k, direct)[key]
    return _union_of((_closure_cached(x, k) for x in members), _default_names(n))


def essential_graph_oracle(d: DAG, *, max_n: int = DEFAULT_DAG_CAP) -> PMG:
    """Classical essential graph (CPDAG) by enumerating DAGs with the same
    skeleton and unshielded colliders."""
    _check_cap(d.n, max_n)
    key = equivalence_key(d)
    members = [x for x in enumerate_dags(d.n, d.names, max_n=max_n) if equivalence_key(x) == key]
    return _union_of(members, d.names)


def markov_equivalent_mags(m: MixedGraph, *, max_edges: int = DEFAULT_PAG_EDGE_CAP) -> list[MixedGraph]:
    """All MAGs Markov equivalent to ``m``, by orienting ``m``'s skeleton."""
    if not isinstance(m, MixedGraph):
        m = MixedGraph(m.names, m.edges())
    if not m.is_ancestral():
        raise ValueError("input is not an ancestral graph")
    edges = [(i, j) for i, j, _, _ in m.edges()]
    if len(edges) > max_edges:
        raise OracleBudgetError(
            f"{len(edges)} edges exceed the PAG oracle cap {max_edges} (raise it with --max-edges)")
    n = m.n
    mm = m.m
    adj = [[bool(x) for x in row] for row in mm]
    target = {}
    # unshielded triples (a, c, b): collider status must match m
    triples_at: dict[int, list] = defaultdict(list)
    for c in range(n):
        nb = [x for x in range(n) if adj[c][x]]
        for a, b in itertools.combinations(nb, 2):
            if not adj[a][b]:
                target[a, c, b] = mm[a][c] == ARROW and mm[b][c] == ARROW
    pos = {e: t for t, e in enumerate(edges)}
    for (a, c, b) in target:
        e1 = pos[min(a, c), max(a, c)]
        e2 = pos[min(b, c), max(b, c)]
        triples_at[max(e1, e2)].append((a, c, b))

    cur = [[0] * n for _ in range(n)]
    par = [0] * n
    out = []
    choices = ((TAIL, ARROW), (ARROW, TAIL), (ARROW, ARROW))
    bidirected: list[tuple[int, int]] = []

    def ancestral() -> bool:
        # adding edges never removes a violation, so partial graphs can be pruned
        anc = list(par)
        changed = True
        while changed:
            changed = False
            for v in range(n):
                new = anc[v]
                for u in _bits(anc[v]):
                    new |= anc[u]
                if new != anc[v]:
                    anc[v] = new
                    changed = True
        if any(anc[v] >> v & 1 for v in range(n)):
            return False
        return not any(anc[v] >> u & 1 or anc[u] >> v & 1 for u, v in bidirected)

    ref_paths = {p: _collider_on(mm, p) for p in discriminating_paths(m)}
    view = SimpleNamespace(m=cur, n=n)

    def rec(t: int):
        if t == len(edges):
            # skeleton, unshielded colliders and ancestrality hold by construction
            if any(p in ref_paths and _collider_on(cur, p) != ref_paths[p]
                   for p in discriminating_paths(view)):
                return
            cand = MixedGraph(m.names, [(i, j, cur[j][i], cur[i][j]) for i, j in edges])
            if is_maximal(cand)[0]:
                out.append(cand)
            return
        i, j = edges[t]
        for mi, mj in choices:
            cur[j][i], cur[i][j] = mi, mj
            if not all((cur[a][c] == ARROW and cur[b][c] == ARROW) == want
                       for a, c, b in triples_at[t] for want in (target[a, c, b],)):
                continue
            if mi == TAIL:
                par[j] |= 1 << i
            elif mj == TAIL:
                par[i] |= 1 << j
            else:
                bidirected.append((i, j))
            if ancestral():
                rec(t + 1)
            if mi == TAIL:
                par[j] &= ~(1 << i)
            elif mj == TAIL:
                par[i] &= ~(1 << j)
            else:
                bidirected.pop()
        cur[i][j] = cur[j][i] = 0

    rec(0)
    return out


def pag_oracle(m: MixedGraph, *, max_edges: int = DEFAULT_PAG_EDGE_CAP) -> PMG:
    """PAG of a MAG: marks shared by every Markov-equivalent MAG, circles elsewhere."""
    mags = markov_equivalent_mags(m, max_edges=max_edges)
    if not mags:
        raise ValueError("input is not a maximal ancestral graph")
    edges = []
    for i, j, _, _ in mags[0].edges():
        at_i = {g.m[j][i] for g in mags}
        at_j = {g.m[i][j] for g in mags}
        edges.append((i, j,
                      Mark(at_i.pop()) if len(at_i) == 1 else CIRCLE,
                      Mark(at_j.pop()) if len(at_j) == 1 else CIRCLE))
    return PMG(m.names, edges)


def pmg_subset(a: PMG, b: PMG) -> bool:
    """``a`` is a subset of ``b``: same skeleton, and every tail or arrowhead of
    ``b`` appears at the same endpoint in ``a``."""
    if set(a.names) != set(b.names):
        return False
    if a.names != b.names:
        b = b.reordered(a.names)
    if a.skeleton() != b.skeleton():
        return False
    for i, j, mi, mj in b.edges():
        if mi != CIRCLE and a.m[j][i] != mi:
            return False
        if mj != CIRCLE and a.m[i][j] != mj:
            return False
    return True
