"""The k-PC learner.

Steps, in order: bounded separating-set search on a complete circle graph,
edge removal, unshielded collider orientation, FCI orientation rules
R1-R4 and R8-R10, and the tail rules R11/R12 for vertices without
arrowheads. Every mark change is recorded as a :class:`RuleEvent`.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .citest import CITester
from .closure import discriminating_paths
from .graphs import ARROW, CIRCLE, TAIL, Mark, PMG
from .separation import COVERED, SearchScope, SepsetTable, clamp_k

__all__ = [
    "RuleEvent",
    "LearnerState",
    "KPCOptions",
    "InvariantViolation",
    "learn_skeleton",
    "orient_unshielded_colliders",
    "fci_orient",
    "rule_r11_r12",
    "run_kpc",
    "kpc_learn",
    "replay",
    "FCI_RULES",
]

log = logging.getLogger(__name__)


class InvariantViolation(AssertionError):
    """A property guaranteed in oracle mode did not hold."""


@dataclass(frozen=True)
class RuleEvent:
    """One endpoint mark change: the mark at ``at`` on the edge ``other``-``at``."""

    rule: str
    other: str
    at: str
    old: str
    new: str
    why: tuple = ()

    def to_json(self) -> str:
        return json.dumps({"rule": self.rule, "edge": [self.other, self.at], "at": self.at,
                           "old": self.old, "new": self.new, "why": list(self.why)})

    @classmethod
    def from_json(cls, line: str) -> "RuleEvent":
        d = json.loads(line)
        return cls(d["rule"], d["edge"][0], d["at"], d["old"], d["new"], tuple(d.get("why", ())))


@dataclass
class LearnerState:
    graph: PMG
    sepsets: SepsetTable
    k: int
    trace: list[RuleEvent] = field(default_factory=list)
    conflicts: list[tuple] = field(default_factory=list)
    r4_colliders: list[tuple] = field(default_factory=list)
    skeleton_graph: PMG | None = None

    def set_mark(self, rule: str, u: int, v: int, mark: Mark, why: Sequence = ()) -> bool:
        """Put ``mark`` at ``v`` on edge ``u``-``v``; only circles are rewritten."""
        g = self.graph
        cur = g.m[u][v]
        if cur == mark:
            return False
        if cur != CIRCLE:
            self.conflicts.append((rule, u, v, Mark(cur), Mark(mark)))
            log.debug("%s: refusing to rewrite %s at %s", rule, Mark(cur).name, g.names[v])
            return False
        g.orient(u, v, mark)
        names = g.names
        self.trace.append(RuleEvent(rule, names[u], names[v], Mark(cur).name, Mark(mark).name,
                                    tuple(names[x] for x in why)))
        return True


@dataclass
class KPCOptions:
    """``r4=False`` drops the discriminating-path rule, leaving R1-R3 and R8-R10.

    ``collider_conflict`` decides what Step 3 does when an arrowhead is asked
    for at an endpoint already fixed to another mark: keep the first mark
    (``"first"``) or overwrite it (``"overwrite"``). Conflicts are logged
    either way.
    """

    scope: SearchScope = SearchScope.ALL
    step5: str = "single"  # single | fixpoint | off
    r4: bool = True
    collider_conflict: str = "first"

    def __post_init__(self):
        self.scope = SearchScope(self.scope)
        if self.step5 not in ("single", "fixpoint", "off"):
            raise ValueError(f"step5 must be single, fixpoint or off, not {self.step5!r}")
        if self.collider_conflict not in ("first", "overwrite"):
            raise ValueError("collider_conflict must be first or overwrite")


# -- steps 0 to 2 ---------------------------------------------------------------

def learn_skeleton(tester: CITester, names: Sequence[str], k: int,
                   scope: SearchScope = SearchScope.ALL) -> LearnerState:
    """Complete circle graph minus every pair separated by a set of size <= k."""
    n = len(names)
    k = clamp_k(k, n)
    table = SepsetTable(n, k)
    graph = PMG.complete(names, CIRCLE)
    pairs = list(itertools.combinations(range(n), 2))
    if SearchScope(scope) == SearchScope.ALL:
        for i, j in pairs:
            rest = [v for v in range(n) if v != i and v != j]
            table[i, j] = COVERED
            for size in range(k + 1):
                hit = next((c for c in itertools.combinations(rest, size)
                            if tester.independent(i, j, c)), None)
                if hit is not None:
                    table[i, j] = hit
                    break
        for i, j in table.separated_pairs():
            graph.remove_edge(i, j)
    else:
        for level in range(k + 1):
            adj = [set(graph.neighbors(v)) for v in range(n)]
            for i, j in pairs:
                if not graph.m[i][j] or (i, j) in table:
                    continue
                found = None
                for x, y in ((i, j), (j, i)):
                    pool = sorted(adj[x] - {y})
                    found = next((c for c in itertools.combinations(pool, level)
                                  if tester.independent(i, j, c)), None)
                    if found is not None:
                        break
                if found is not None:
                    table[i, j] = found
                    graph.remove_edge(i, j)
        for i, j in pairs:
            if (i, j) not in table:
                table[i, j] = COVERED
    return LearnerState(graph, table, k, skeleton_graph=graph.copy())


# -- step 3 ------------------------------------------------------------------

def orient_unshielded_colliders(state: LearnerState, policy: str = "first") -> LearnerState:
    """``a *-> c <-* b`` for non-adjacent ``a``, ``b`` whose separating set misses ``c``."""
    g = state.graph
    m = g.m
    n = g.n
    for a, b in itertools.combinations(range(n), 2):
        if m[a][b]:
            continue
        sep = state.sepsets.get(a, b)
        if sep is None or sep is COVERED:
            continue
        for c in range(n):
            if c in sep or not m[a][c] or not m[b][c]:
                continue
            for x in (a, b):
                if not state.set_mark("UC", x, c, ARROW, (a, c, b)) and m[x][c] != ARROW \
                        and policy == "overwrite":
                    g.set_edge(x, c, m[c][x], ARROW)
    return state


# -- step 4: FCI rules -----------------------------------------------------------

def _r1(state: LearnerState) -> bool:
    m = state.graph.m
    n = len(m)
    changed = False
    for b in range(n):
        for a in range(n):
            if m[a][b] != ARROW:
                continue
            for c in range(n):
                if c == a or not m[b][c] or m[a][c] or m[c][b] != CIRCLE:
                    continue
                if m[a][b] != ARROW or m[c][b] != CIRCLE:
                    continue
                changed |= state.set_mark("R1", c, b, TAIL, (a, b, c))
                changed |= state.set_mark("R1", b, c, ARROW, (a, b, c))
    return changed


def _r2(state: LearnerState) -> bool:
    m = state.graph.m
    n = len(m)
    changed = False
    for a in range(n):
        for c in range(n):
            if a == c or m[a][c] != CIRCLE:
                continue
            for b in range(n):
                if b in (a, c) or not m[a][b] or not m[b][c]:
                    continue
                first = m[a][b] == ARROW and m[b][a] == TAIL and m[b][c] == ARROW
                second = m[a][b] == ARROW and m[b][c] == ARROW and m[c][b] == TAIL
                if first or second:
                    changed |= state.set_mark("R2", a, c, ARROW, (a, b, c))
                    break
    return changed


def _r3(state: LearnerState) -> bool:
    m = state.graph.m
    n = len(m)
    changed = False
    for b in range(n):
        into = [x for x in range(n) if m[x][b] == ARROW]
        for a, c in itertools.combinations(into, 2):
            if m[a][c]:
                continue
            for d in range(n):
                if d in (a, b, c):
                    continue
                if m[a][d] == CIRCLE and m[c][d] == CIRCLE and m[d][b] == CIRCLE:
                    changed |= state.set_mark("R3", d, b, ARROW, (a, d, c, b))
    return changed


def _circle_arrows(m) -> list[tuple[int, int]]:
    """Edges ``a o-> c`` as ``(a, c)``."""
    n = len(m)
    return [(a, c) for a in range(n) for c in range(n)
            if m[c][a] == CIRCLE and m[a][c] == ARROW]


def _r8(state: LearnerState) -> bool:
    m = state.graph.m
    n = len(m)
    changed = False
    for a, c in _circle_arrows(m):
        if m[c][a] != CIRCLE:
            continue
        for b in range(n):
            if (m[a][b] == ARROW and m[b][a] == TAIL and m[b][c] == ARROW and m[c][b] == TAIL):
                changed |= state.set_mark("R8", c, a, TAIL, (a, b, c))
                break
    return changed


def _uncovered_pd_path(m, path: list[int], target: int,
                       accept: Callable[[list[int]], bool] | None = None) -> list[int] | None:
    """Extend ``path`` into an uncovered potentially directed path ending at ``target``."""
    n = len(m)
    w = path[-1]
    prev = path[-2] if len(path) > 1 else None
    for x in range(n):
        if not m[w][x] or x in path or m[x][w] == ARROW:
            continue
        if prev is not None and m[prev][x]:
            continue
        if x == target:
            full = path + [x]
            if accept is None or accept(full):
                return full
            continue
        path.append(x)
        found = _uncovered_pd_path(m, path, target, accept)
        path.pop()
        if found:
            return found
    return None


def _r9(state: LearnerState) -> bool:
    m = state.graph.m
    n = len(m)
    changed = False
    for a, c in _circle_arrows(m):
        if m[c][a] != CIRCLE:
            continue
        for b in range(n):
            # first step a - b may not carry an arrowhead at a; b must not touch c
            if b == c or not m[a][b] or m[b][a] == ARROW or m[b][c]:
                continue
            p = _uncovered_pd_path(m, [a, b], c)
            if p:
                changed |= state.set_mark("R9", c, a, TAIL, tuple(p))
                break
    return changed


def _first_steps(m, a: int, target: int, avoid: int) -> dict[int, list[int]]:
    """First vertices of uncovered p.d. paths from ``a`` to ``target``."""
    out = {}
    for mu in range(len(m)):
        if mu == avoid or not m[a][mu] or m[mu][a] == ARROW:
            continue
        if mu == target:
            out[mu] = [a, mu]
            continue
        p = _uncovered_pd_path(m, [a, mu], target)
        if p:
            out[mu] = p
    return out


def _r10(state: LearnerState) -> bool:
    m = state.graph.m
    n = len(m)
    changed = False
    for a, c in _circle_arrows(m):
        if m[c][a] != CIRCLE:
            continue
        parents = [x for x in range(n) if x != a and m[x][c] == ARROW and m[c][x] == TAIL]
        done = False
        for b, d in itertools.combinations(parents, 2):
            fb = _first_steps(m, a, b, c)
            if not fb:
                continue
            fd = _first_steps(m, a, d, c)
            for mu, omega in itertools.product(fb, fd):
                if mu != omega and not m[mu][omega]:
                    changed |= state.set_mark("R10", c, a, TAIL, (b, d, mu, omega))
                    done = True
                    break
            if done:
                break
    return changed


def _r4(state: LearnerState) -> bool:
    """Discriminating path ``(x, ..., u, Y, v)`` with ``Y o-* v``: ``Y -> v`` when
    ``Y`` is in the separating set of ``x`` and ``v``, else ``u <-> Y <-> v``."""
    g = state.graph
    m = g.m
    changed = False
    for p in discriminating_paths(g):
        x, u, y, v = p[0], p[-3], p[-2], p[-1]
        if m[v][y] != CIRCLE:
            continue
        sep = state.sepsets.get(x, v)
        if not isinstance(sep, frozenset):
            continue
        if y in sep:
            changed |= state.set_mark("R4", v, y, TAIL, p)
            changed |= state.set_mark("R4", y, v, ARROW, p)
        else:
            state.r4_colliders.append(p)
            changed |= state.set_mark("R4", u, y, ARROW, p)
            changed |= state.set_mark("R4", v, y, ARROW, p)
            changed |= state.set_mark("R4", y, v, ARROW, p)
    return changed


FCI_RULES = {"R1": _r1, "R2": _r2, "R3": _r3, "R4": _r4,
             "R8": _r8, "R9": _r9, "R10": _r10}


def _sweep(state: LearnerState, rules: Sequence[str]) -> bool:
    changed = False
    for r in rules:
        changed |= FCI_RULES[r](state)
    return changed


def _fixpoint(state: LearnerState, rules: Sequence[str]) -> None:
    # R1-R3 settle before any of the later rules get a look
    base = [r for r in rules if r in ("R1", "R2", "R3")]
    rest = [r for r in rules if r not in base]
    while True:
        while _sweep(state, base):
            pass
        if not _sweep(state, rest):
            return


def fci_orient(state: LearnerState, rules: Sequence[str] | None = None,
               r4: bool = True) -> LearnerState:
    """R1-R4 to a fixpoint, then R1-R4 with R8-R10 to a fixpoint.

    ``rules`` restricts the run to a subset (applied to a single fixpoint).
    """
    if rules is not None:
        _fixpoint(state, [r for r in FCI_RULES if r in set(rules)])
        return state
    first = ["R1", "R2", "R3", "R4"] if r4 else ["R1", "R2", "R3"]
    _fixpoint(state, first)
    _fixpoint(state, first + ["R8", "R9", "R10"])
    return state


def r4_candidates(g: PMG) -> list[tuple[int, ...]]:
    """Discriminating paths whose end vertex still has a circle towards ``Y``."""
    m = g.m
    return [p for p in discriminating_paths(g) if m[p[-1]][p[-2]] == CIRCLE]


# -- step 5 --------------------------------------------------------------------

def _step5_plan(g: PMG) -> list[tuple[int, list[int], list[int]]]:
    m = g.m
    n = g.n
    plan = []
    for a in range(n):
        nbrs = [x for x in range(n) if m[a][x]]
        if any(m[x][a] == ARROW for x in nbrs):
            continue
        B = [b for b in nbrs if m[b][a] == CIRCLE and m[a][b] == ARROW]
        C = [c for c in nbrs if m[c][a] == CIRCLE and m[a][c] == CIRCLE]
        # undirected neighbours could be parents of a as well, so they gate too
        gate = C + [u for u in nbrs if m[u][a] == TAIL and m[a][u] == TAIL]
        Bs = [b for b in B if not any(m[b][w] for w in gate)]
        Cs = [c for c in C if not any(m[c][w] for w in gate if w != c)]
        if Bs or Cs:
            plan.append((a, Bs, Cs))
    return plan


def rule_r11_r12(state: LearnerState, mode: str = "single") -> LearnerState:
    """Tail rules for vertices with no arrowhead on any incident edge.

    For such a vertex ``a``, with ``B`` its ``o->`` neighbours and ``C`` its
    ``o-o`` neighbours: ``a o-> b`` becomes ``a -> b`` when ``b`` is adjacent to
    no member of ``C`` (R11), and ``a o-o c`` becomes ``a -- c`` when ``c`` is
    adjacent to no other member of ``C`` (R12). The sets are computed for all
    vertices before any mark changes. ``mode="fixpoint"`` repeats until stable.
    """
    if mode == "off":
        return state
    while True:
        changed = False
        for a, Bs, Cs in _step5_plan(state.graph):
            for b in Bs:
                changed |= state.set_mark("R11", b, a, TAIL, (a, b))
            for c in Cs:
                changed |= state.set_mark("R12", c, a, TAIL, (a, c))
                changed |= state.set_mark("R12", a, c, TAIL, (a, c))
        if mode != "fixpoint" or not changed:
            return state


# -- driver ----------------------------------------------------------------------

def run_kpc(tester: CITester, names: Sequence[str] | None = None, k: int = 1,
            options: KPCOptions | None = None) -> LearnerState:
    """Run every step and return the final learner state."""
    options = options or KPCOptions()
    names = tuple(names if names is not None else tester.names)
    state = learn_skeleton(tester, names, k, options.scope)
    orient_unshielded_colliders(state, options.collider_conflict)
    fci_orient(state, r4=options.r4)
    # colliders on discriminating paths must already be oriented by now
    hits = list(state.r4_colliders)
    if not options.r4:
        hits += [p for p in r4_candidates(state.graph)
                 if not isinstance(state.sepsets.get(p[0], p[-1]), frozenset)
                 or p[-2] not in state.sepsets.get(p[0], p[-1])]
    if hits:
        names = state.graph.names
        msg = "discriminating-path collider not oriented by R1/R2: " + \
            ",".join(names[i] for i in hits[0])
        if tester.is_oracle:
            raise InvariantViolation(msg)
        log.info(msg)
    rule_r11_r12(state, options.step5)
    return state


def kpc_learn(tester: CITester, names: Sequence[str] | None = None, k: int = 1,
              options: KPCOptions | None = None, **kw) -> PMG:
    """Learn a PMG sandwiched between the k-essential graph and the PAG of the k-closure.

    Keyword arguments are forwarded to :class:`KPCOptions`.
    """
    if kw:
        options = KPCOptions(**kw)
    return run_kpc(tester, names, k, options).graph


def replay(start: PMG, trace: Sequence[RuleEvent]) -> PMG:
    """Apply a recorded trace to the post-skeleton graph."""
    g = start.copy()
    for ev in trace:
        g.orient(ev.other, ev.at, Mark[ev.new])
    return g
