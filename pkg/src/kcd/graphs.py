"""Graph types shared by every other module.

All three graph classes keep a dense mark matrix ``m`` where ``m[i][j]`` is the
mark sitting at ``j`` on the edge between ``i`` and ``j`` (``0`` when the pair
is non-adjacent). A directed edge ``i -> j`` is therefore ``m[i][j] == ARROW``
and ``m[j][i] == TAIL``.

``PMG`` accepts every mark, ``MixedGraph`` only directed and bidirected edges,
``DAG`` only directed edges without cycles. ``DAG`` and ``MixedGraph`` are
immutable once built; ``PMG`` can be edited in place, which is what the
learners do.
"""

from __future__ import annotations

import itertools
from enum import IntEnum
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Mark",
    "PMG",
    "MixedGraph",
    "DAG",
    "GraphFormatError",
    "OrientationConflict",
    "parse_graph",
    "format_graph",
    "read_graph",
    "write_graph",
    "to_dot",
]


class Mark(IntEnum):
    TAIL = 1
    ARROW = 2
    CIRCLE = 3


TAIL, ARROW, CIRCLE = Mark.TAIL, Mark.ARROW, Mark.CIRCLE

_LEFT = {TAIL: "-", ARROW: "<", CIRCLE: "o"}
_RIGHT = {TAIL: "-", ARROW: ">", CIRCLE: "o"}


class GraphFormatError(ValueError):
    """Raised for malformed graph text or inconsistent edge lists."""


class OrientationConflict(RuntimeError):
    """Raised when a non-circle mark would be overwritten."""


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class PMG:
    """Partial mixed graph: edge marks are tails, arrowheads or circles.

    Parameters
    ----------
    names : sequence of str
        Vertex labels; the position of a label is its index.
    edges : iterable of (u, v, mark_at_u, mark_at_v)
        ``u`` and ``v`` may be names or indices.
    """

    _allowed = frozenset({TAIL, ARROW, CIRCLE})
    _mutable = True

    def __init__(self, names: Sequence[str], edges: Iterable = ()):
        names = [str(x) for x in names]
        if len(set(names)) != len(names):
            raise GraphFormatError("duplicate vertex names")
        self.names: tuple[str, ...] = tuple(names)
        self._index = {x: i for i, x in enumerate(self.names)}
        n = len(self.names)
        self.m = [[0] * n for _ in range(n)]
        self._cache: dict = {}
        for u, v, mu, mv in edges:
            i, j = self.index(u), self.index(v)
            if i == j:
                raise GraphFormatError(f"self-loop at {self.names[i]}")
            if self.m[i][j]:
                raise GraphFormatError(f"duplicate edge {self.names[i]}-{self.names[j]}")
            self._put(i, j, Mark(mu), Mark(mv))
        self._validate()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_matrix(cls, names: Sequence[str], m) -> "PMG":
        """Build from a mark matrix (``m[i][j]`` = mark at ``j``)."""
        m = np.asarray(m, dtype=int)
        edges = [(i, j, int(m[j, i]), int(m[i, j]))
                 for i, j in itertools.combinations(range(len(names)), 2) if m[i, j]]
        return cls(names, edges)

    @classmethod
    def complete(cls, names: Sequence[str], mark: Mark = CIRCLE) -> "PMG":
        return cls(names, [(i, j, mark, mark)
                           for i, j in itertools.combinations(range(len(names)), 2)])

    def _put(self, i: int, j: int, mi: Mark, mj: Mark) -> None:
        if mi not in self._allowed or mj not in self._allowed:
            raise GraphFormatError(f"{type(self).__name__} does not allow marks {mi.name}/{mj.name}")
        self.m[i][j] = mj
        self.m[j][i] = mi

    def _validate(self) -> None:
        pass

    def copy(self) -> "PMG":
        return PMG(self.names, self.edges())

    def to_pmg(self) -> "PMG":
        return PMG(self.names, self.edges())

    def reordered(self, names: Sequence[str]) -> "PMG":
        """Same graph with vertices listed in the order ``names``."""
        nm = self.names
        return type(self)(names, [(nm[i], nm[j], mi, mj) for i, j, mi, mj in self.edges()])

    def relabel(self, names: Sequence[str]) -> "PMG":
        """Same structure with new vertex labels (positional)."""
        return type(self)(names, self.edges())

    # -- basic queries --------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, v) -> int:
        if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
            if not 0 <= v < len(self.names):
                raise KeyError(f"vertex index {v} out of range")
            return int(v)
        try:
            return self._index[v]
        except KeyError:
            raise KeyError(f"unknown vertex {v!r}") from None

    def indices(self, vs: Iterable) -> list[int]:
        return [self.index(v) for v in vs]

    def adjacent(self, u, v) -> bool:
        return bool(self.m[self.index(u)][self.index(v)])

    def mark(self, u, v) -> Mark | None:
        """Mark at ``v`` on the edge ``u``-``v``, or None if non-adjacent."""
        x = self.m[self.index(u)][self.index(v)]
        return Mark(x) if x else None

    def neighbors(self, v) -> list[int]:
        row = self.m[self.index(v)]
        return [j for j, x in enumerate(row) if x]

    def edges(self) -> list[tuple[int, int, Mark, Mark]]:
        """Edges as ``(i, j, mark_at_i, mark_at_j)`` with ``i < j``."""
        m = self.m
        return [(i, j, Mark(m[j][i]), Mark(m[i][j]))
                for i in range(self.n) for j in range(i + 1, self.n) if m[i][j]]

    def num_edges(self) -> int:
        return sum(1 for i in range(self.n) for j in range(i + 1, self.n) if self.m[i][j])

    def is_directed(self, u, v) -> bool:
        """True for ``u -> v``."""
        i, j = self.index(u), self.index(v)
        return self.m[i][j] == ARROW and self.m[j][i] == TAIL

    def is_bidirected(self, u, v) -> bool:
        i, j = self.index(u), self.index(v)
        return self.m[i][j] == ARROW and self.m[j][i] == ARROW

    def parents(self, v) -> list[int]:
        j = self.index(v)
        return [i for i in range(self.n) if self.m[i][j] == ARROW and self.m[j][i] == TAIL]

    def children(self, v) -> list[int]:
        i = self.index(v)
        return [j for j in range(self.n) if self.m[i][j] == ARROW and self.m[j][i] == TAIL]

    def skeleton(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset((i, j)) for i, j, _, _ in self.edges())

    def named_skeleton(self) -> frozenset[frozenset[str]]:
        return frozenset(frozenset((self.names[i], self.names[j])) for i, j, _, _ in self.edges())

    def adjacency_matrix(self) -> np.ndarray:
        return (np.asarray(self.m) != 0).astype(np.int8)

    def mark_matrix(self) -> np.ndarray:
        return np.asarray(self.m, dtype=np.int8)

    # -- bitmask views (cached; dropped on mutation) --------------------------

    def _bitmasks(self):
        cached = self._cache.get("bits")
        if cached is None:
            n, m = self.n, self.m
            adj = [0] * n
            par = [0] * n
            for i in range(n):
                row = m[i]
                for j in range(n):
                    if row[j]:
                        adj[i] |= 1 << j
                        if row[j] == ARROW and m[j][i] == TAIL:
                            par[j] |= 1 << i
            cached = (adj, par)
            self._cache["bits"] = cached
        return cached

    def ancestors_mask(self, mask: int) -> int:
        """Bitmask of proper and improper ancestors of the vertices in ``mask``."""
        _, par = self._bitmasks()
        seen = mask
        frontier = mask
        while frontier:
            nxt = 0
            for v in _bits(frontier):
                nxt |= par[v]
            frontier = nxt & ~seen
            seen |= frontier
        return seen

    def ancestors(self, x) -> set[int]:
        """Vertices with a directed path into ``x`` (``x`` itself excluded).

        ``x`` may also be an iterable of vertices; the result is then the union,
        still excluding nothing but vertices that are not ancestors of any member.
        """
        if isinstance(x, (str, int, np.integer)):
            i = self.index(x)
            _, par = self._bitmasks()
            start = par[i]
            return set(_bits(self.ancestors_mask(start)))
        result: set[int] = set()
        for v in x:
            result |= self.ancestors(v)
        return result

    def descendants(self, x) -> set[int]:
        i = self.index(x)
        _, par = self._bitmasks()
        ch = [0] * self.n
        for v in range(self.n):
            for p in _bits(par[v]):
                ch[p] |= 1 << v
        seen = 0
        frontier = ch[i]
        while frontier:
            seen |= frontier
            nxt = 0
            for v in _bits(frontier):
                nxt |= ch[v]
            frontier = nxt & ~seen
        return set(_bits(seen))

    def has_directed_cycle(self) -> bool:
        _, par = self._bitmasks()
        return any(self.ancestors_mask(par[v]) >> v & 1 for v in range(self.n))

    def topological_order(self) -> list[int]:
        """Kahn order over the directed edges; raises if there is a cycle."""
        _, par = self._bitmasks()
        indeg = [bin(p).count("1") for p in par]
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for v in range(self.n):
            for p in _bits(par[v]):
                kids[p].append(v)
        ready = [v for v in range(self.n) if indeg[v] == 0]
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for c in kids[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if len(order) != self.n:
            raise ValueError("graph has a directed cycle")
        return order

    def unshielded_colliders(self) -> frozenset[tuple[int, int, int]]:
        """Triples ``(a, c, b)``, ``a < b``, with arrowheads at ``c`` and ``a``, ``b`` non-adjacent."""
        m = self.m
        out = set()
        for c in range(self.n):
            into = [a for a in range(self.n) if m[a][c] == ARROW]
            for a, b in itertools.combinations(into, 2):
                if not m[a][b]:
                    out.add((a, c, b))
        return frozenset(out)

    def named_unshielded_colliders(self) -> frozenset[tuple[str, str, str]]:
        out = set()
        for a, c, b in self.unshielded_colliders():
            x, y = sorted((self.names[a], self.names[b]))
            out.add((x, self.names[c], y))
        return frozenset(out)

    def is_ancestral(self) -> bool:
        """No directed cycle and no bidirected edge closing an almost directed cycle."""
        if self.has_directed_cycle():
            return False
        for i, j, mi, mj in self.edges():
            if mi == ARROW and mj == ARROW:
                if self.ancestors_mask(1 << i) >> j & 1 or self.ancestors_mask(1 << j) >> i & 1:
                    return False
        return True

    # -- mutation (PMG only) --------------------------------------------------

    def _check_mutable(self) -> None:
        if not self._mutable:
            raise TypeError(f"{type(self).__name__} is immutable")

    def set_edge(self, u, v, mark_u: Mark, mark_v: Mark) -> None:
        self._check_mutable()
        i, j = self.index(u), self.index(v)
        if i == j:
            raise GraphFormatError("self-loop")
        self._put(i, j, Mark(mark_u), Mark(mark_v))
        self._cache.clear()

    def remove_edge(self, u, v) -> None:
        self._check_mutable()
        i, j = self.index(u), self.index(v)
        self.m[i][j] = self.m[j][i] = 0
        self._cache.clear()

    def orient(self, u, v, mark: Mark, *, strict: bool = True) -> bool:
        """Set the mark at ``v`` on edge ``u``-``v``.

        Only circles may be rewritten. Returns True if the graph changed.
        With ``strict`` a rewrite of a non-circle mark raises
        :class:`OrientationConflict`; otherwise it is refused and False returned.
        """
        self._check_mutable()
        i, j = self.index(u), self.index(v)
        cur = self.m[i][j]
        if not cur:
            raise KeyError(f"{self.names[i]} and {self.names[j]} are not adjacent")
        if cur == mark:
            return False
        if cur != CIRCLE:
            if strict:
                raise OrientationConflict(
                    f"mark at {self.names[j]} on {self.names[i]}-{self.names[j]} is "
                    f"{Mark(cur).name}, refusing {Mark(mark).name}")
            return False
        self.m[i][j] = Mark(mark)
        self._cache.clear()
        return True

    # -- comparison -----------------------------------------------------------

    def _key(self):
        k = self._cache.get("key")
        if k is None:
            k = (self.names, tuple(tuple(r) for r in self.m))
            if not self._mutable:
                self._cache["key"] = k
        return k

    def labelled_edges(self) -> frozenset:
        """Edges as ``(name_u, name_v, mark_u, mark_v)`` with ``name_u < name_v``."""
        out = []
        for i, j, mi, mj in self.edges():
            a, b = self.names[i], self.names[j]
            out.append((a, b, mi, mj) if a < b else (b, a, mj, mi))
        return frozenset(out)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PMG):
            return NotImplemented
        if self.names == other.names:
            return self.m == other.m
        return set(self.names) == set(other.names) and self.labelled_edges() == other.labelled_edges()

    def __hash__(self):
        if self._mutable:
            raise TypeError("PMG is mutable and unhashable")
        return hash(self._key())

    def __repr__(self) -> str:
        body = ", ".join(f"{self.names[i]} {_glyph(mi, mj)} {self.names[j]}"
                         for i, j, mi, mj in self.edges())
        return f"{type(self).__name__}([{body}])"


class MixedGraph(PMG):
    """Directed and bidirected edges only; immutable."""

    _allowed = frozenset({TAIL, ARROW})
    _mutable = False

    def _validate(self) -> None:
        for i, j, mi, mj in self.edges():
            if mi == TAIL and mj == TAIL:
                raise GraphFormatError(
                    f"undirected edge {self.names[i]}--{self.names[j]} in a mixed graph")

    def copy(self) -> "MixedGraph":
        return self

    def without_edge(self, u, v) -> "MixedGraph":
        i, j = self.index(u), self.index(v)
        return MixedGraph(self.names, [e for e in self.edges() if {e[0], e[1]} != {i, j}])

    def bidirected_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j, mi, mj in self.edges() if mi == ARROW and mj == ARROW]


class DAG(MixedGraph):
    """Directed acyclic graph; immutable.

    ``edges`` may also be given as plain ``(u, v)`` pairs meaning ``u -> v``.
    """

    def __init__(self, names: Sequence[str], edges: Iterable = ()):
        full = []
        for e in edges:
            if len(e) == 2:
                full.append((e[0], e[1], TAIL, ARROW))
            else:
                full.append(e)
        super().__init__(names, full)

    def _validate(self) -> None:
        for i, j, mi, mj in self.edges():
            if mi == mj:
                raise GraphFormatError(
                    f"non-directed edge between {self.names[i]} and {self.names[j]} in a DAG")
        if self.has_directed_cycle():
            raise GraphFormatError("graph has a directed cycle")

    def arcs(self) -> list[tuple[int, int]]:
        """Directed edges as ``(tail, head)`` index pairs."""
        return [(i, j) if mj == ARROW else (j, i) for i, j, mi, mj in self.edges()]

    def named_arcs(self) -> list[tuple[str, str]]:
        return [(self.names[i], self.names[j]) for i, j in self.arcs()]


def as_dag(g: PMG) -> DAG:
    return g if isinstance(g, DAG) else DAG(g.names, g.edges())


def as_mixed(g: PMG) -> MixedGraph:
    return g if isinstance(g, MixedGraph) else MixedGraph(g.names, g.edges())


# -- text format ---------------------------------------------------------------

_MARK_CHARS = {"-": TAIL, "<": ARROW, ">": ARROW, "o": CIRCLE}


def _glyph(mi: Mark, mj: Mark) -> str:
    g = _LEFT[mi] + "-" + _RIGHT[mj]
    return {"---": "--", "-->": "->", "<--": "<-"}.get(g, g)


def _parse_glyph(g: str) -> tuple[Mark, Mark]:
    if len(g) == 2:
        g = {"->": "-->", "<-": "<--", "--": "---"}.get(g, "")
    if len(g) != 3 or g[1] != "-" or g[0] not in "-<o" or g[2] not in "->o":
        raise GraphFormatError(f"unknown edge glyph {g!r}")
    return _MARK_CHARS[g[0]], _MARK_CHARS[g[2]]


def parse_graph(text: str, kind: type[PMG] | None = None) -> PMG:
    """Parse the line-based graph format.

    ``nodes: a b c`` declares vertices, ``edge: a o-> b`` adds an edge.
    Returns the most specific class that fits unless ``kind`` is given.
    """
    names: list[str] | None = None
    edges = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise GraphFormatError(f"line {lineno}: expected 'key: value'")
        if key == "nodes":
            if names is not None:
                raise GraphFormatError(f"line {lineno}: nodes declared twice")
            names = rest.split()
        elif key == "edge":
            parts = rest.split()
            if len(parts) != 3:
                raise GraphFormatError(f"line {lineno}: expected 'edge: u GLYPH v'")
            u, g, v = parts
            if names is None:
                raise GraphFormatError(f"line {lineno}: edge before nodes")
            for x in (u, v):
                if x not in names:
                    raise GraphFormatError(f"line {lineno}: unknown vertex {x!r}")
            if u == v:
                raise GraphFormatError(f"line {lineno}: self-loop at {u}")
            pair = frozenset((u, v))
            if pair in seen:
                raise GraphFormatError(f"line {lineno}: duplicate edge {u}-{v}")
            seen.add(pair)
            mu, mv = _parse_glyph(g)
            edges.append((u, v, mu, mv))
        else:
            raise GraphFormatError(f"line {lineno}: unknown statement {key!r}")
    if names is None:
        raise GraphFormatError("missing 'nodes:' line")
    if kind is not None:
        return kind(names, edges)
    for cls in (DAG, MixedGraph):
        try:
            return cls(names, edges)
        except GraphFormatError:
            pass
    return PMG(names, edges)


def format_graph(g: PMG) -> str:
    """Canonical text: vertices sorted by name, edges sorted by name pair."""
    lines = ["nodes: " + " ".join(sorted(g.names))]
    for a, b, ma, mb in sorted(g.labelled_edges()):
        lines.append(f"edge: {a} {_glyph(ma, mb)} {b}")
    return "\n".join(lines) + "\n"


def read_graph(path, kind: type[PMG] | None = None) -> PMG:
    with open(path) as fh:
        return parse_graph(fh.read(), kind)


def write_graph(g: PMG, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(g))


def to_dot(g: PMG) -> str:
    shape = {TAIL: "none", ARROW: "normal", CIRCLE: "odot"}
    lines = ["digraph G {"]
    lines += [f'  "{x}";' for x in g.names]
    for i, j, mi, mj in g.edges():
        lines.append(f'  "{g.names[i]}" -> "{g.names[j]}" '
                     f'[dir=both, arrowtail={shape[mi]}, arrowhead={shape[mj]}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
