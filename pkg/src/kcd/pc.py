"""PC-stable baseline and Meek-rule completion of partially directed graphs."""

from __future__ import annotations

import itertools
import logging
from typing import Sequence

from .citest import CITester
from .graphs import ARROW, TAIL, DAG, PMG
from .separation import SepsetTable

__all__ = ["pc_stable_learn", "meek_closure", "cpdag"]

log = logging.getLogger(__name__)


def _undirected(m, a, b) -> bool:
    return m[a][b] == TAIL and m[b][a] == TAIL


def _directed(m, a, b) -> bool:
    return m[a][b] == ARROW and m[b][a] == TAIL


def _point(g: PMG, a: int, b: int) -> bool:
    if not _undirected(g.m, a, b):
        return False
    g.set_edge(a, b, TAIL, ARROW)
    return True


def meek_closure(g: PMG) -> PMG:
    """Apply Meek's rules 1-4 in place until nothing changes. Edges are
    undirected (tail-tail) or directed (tail-arrow)."""
    m = g.m
    n = g.n
    changed = True
    while changed:
        changed = False
        for a, b in itertools.permutations(range(n), 2):
            if not _undirected(m, a, b):
                continue
            # R1: c -> a - b, c and b non-adjacent
            if any(_directed(m, c, a) and not m[c][b] and c != b for c in range(n)):
                changed |= _point(g, a, b)
                continue
            # R2: a -> c -> b
            if any(_directed(m, a, c) and _directed(m, c, b) for c in range(n)):
                changed |= _point(g, a, b)
                continue
            # R3: a - c -> b, a - d -> b, c and d non-adjacent
            cs = [c for c in range(n) if _undirected(m, a, c) and _directed(m, c, b)]
            if any(not m[c][d] for c, d in itertools.combinations(cs, 2)):
                changed |= _point(g, a, b)
                continue
            # R4: a - d -> c -> b, a adjacent to c, d and b non-adjacent
            if any(_undirected(m, a, d) and _directed(m, d, c) and _directed(m, c, b)
                   and m[a][c] and not m[d][b]
                   for c in range(n) for d in range(n) if len({a, b, c, d}) == 4):
                changed |= _point(g, a, b)
    return g


def _orient_v_structures(g: PMG, sepsets: SepsetTable, policy: str = "first") -> list[tuple]:
    m = g.m
    n = g.n
    conflicts = []
    for a, b in itertools.combinations(range(n), 2):
        if m[a][b]:
            continue
        sep = sepsets.get(a, b)
        if not isinstance(sep, frozenset):
            continue
        for c in range(n):
            if c in sep or not m[a][c] or not m[b][c]:
                continue
            for x in (a, b):
                if _undirected(m, x, c):
                    g.set_edge(x, c, TAIL, ARROW)
                elif not _directed(m, x, c):
                    conflicts.append((a, c, b))
                    log.info("v-structure conflict at %s", g.names[c])
                    if policy == "overwrite":
                        g.set_edge(x, c, TAIL, ARROW)
    return conflicts


def pc_stable_learn(tester: CITester, names: Sequence[str] | None = None,
                    max_depth: int | None = None, collider_conflict: str = "first") -> PMG:
    """Order-independent PC: adjacency sets are frozen at the start of each level.

    Returns a partially directed graph with ``--`` and ``->`` edges. Conflicting
    v-structures keep the first orientation unless ``collider_conflict`` is
    ``"overwrite"``.
    """
    if collider_conflict not in ("first", "overwrite"):
        raise ValueError("collider_conflict must be first or overwrite")
    names = tuple(names if names is not None else tester.names)
    n = len(names)
    g = PMG.complete(names, TAIL)
    table = SepsetTable(n, n - 2 if max_depth is None else min(max_depth, max(n - 2, 0)))
    level = 0
    while max_depth is None or level <= max_depth:
        adj = [set(g.neighbors(v)) for v in range(n)]
        if all(len(adj[v]) - 1 < level for v in range(n)):
            break
        for i, j in itertools.combinations(range(n), 2):
            if not g.m[i][j]:
                continue
            for x, y in ((i, j), (j, i)):
                pool = sorted(adj[x] - {y})
                hit = next((c for c in itertools.combinations(pool, level)
                            if tester.independent(i, j, c)), None)
                if hit is not None:
                    table[i, j] = hit
                    g.remove_edge(i, j)
                    break
        level += 1
    _orient_v_structures(g, table, collider_conflict)
    return meek_closure(g)


def cpdag(d: DAG) -> PMG:
    """Essential graph of a DAG: skeleton, v-structures, then Meek's rules."""
    g = PMG(d.names, [(i, j, TAIL, TAIL) for i, j, _, _ in d.edges()])
    for a, c, b in d.unshielded_colliders():
        g.set_edge(a, c, TAIL, ARROW)
        g.set_edge(b, c, TAIL, ARROW)
    return meek_closure(g)
