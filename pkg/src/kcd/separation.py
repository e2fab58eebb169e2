"""d-separation / m-separation and bounded separating-set search."""

from __future__ import annotations

import itertools
import warnings
from enum import Enum
from typing import Iterable, Sequence

from .graphs import ARROW, PMG, _bits

__all__ = [
    "COVERED",
    "SearchScope",
    "SepsetTable",
    "clamp_k",
    "is_separated",
    "find_sepset_upto_k",
    "is_k_covered",
    "separation_statements",
]


class _Covered:
    """Marker stored for pairs with no separating set within the bound."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "COVERED"

    def __reduce__(self):
        return (_Covered, ())


COVERED = _Covered()


class SearchScope(str, Enum):
    ALL = "all"
    NEIGHBORS = "neighbors"


def clamp_k(k: int, n: int) -> int:
    """Clamp a conditioning bound to ``n - 2``, warning when it is lowered."""
    if k < 0:
        raise ValueError("k must be non-negative")
    top = max(n - 2, 0)
    if k > top:
        warnings.warn(f"k={k} exceeds n-2={top}; using k={top}", stacklevel=3)
        return top
    return k


def _mask(g: PMG, vs: Iterable) -> int:
    mask = 0
    for v in vs:
        mask |= 1 << g.index(v)
    return mask


def _separated_idx(g: PMG, a: int, b: int, cmask: int) -> bool:
    # walk over (vertex, arrived-with-arrowhead) states; a collider passes iff it is
    # in An(cond) (cond itself included), a non-collider iff it is not in cond
    m = g.m
    adj, _ = g._bitmasks()
    anc = g.ancestors_mask(cmask)
    seen = set()
    stack = []
    for w in _bits(adj[a]):
        if w == b:
            return False
        stack.append((w, m[a][w] == ARROW))
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        w, into = state
        row = m[w]
        in_cond = cmask >> w & 1
        in_anc = anc >> w & 1
        for x in _bits(adj[w]):
            if into and m[x][w] == ARROW:
                if not in_anc:
                    continue
            elif in_cond:
                continue
            if x == b:
                return False
            nxt = (x, row[x] == ARROW)
            if nxt not in seen:
                stack.append(nxt)
    return True


def is_separated(g: PMG, a, b, cond: Iterable = ()) -> bool:
    """True iff ``a`` and ``b`` are d-separated (m-separated) given ``cond``.

    Arrowheads decide collider status, so the same routine serves DAGs and
    mixed graphs. Circle marks count as non-arrowheads.
    """
    i, j = g.index(a), g.index(b)
    cmask = _mask(g, cond)
    if i == j:
        raise ValueError("a and b must differ")
    if cmask >> i & 1 or cmask >> j & 1:
        raise ValueError("conditioning set must exclude a and b")
    return _separated_idx(g, i, j, cmask)


def _candidates(g: PMG, i: int, j: int, scope: SearchScope) -> list[list[int]]:
    if scope == SearchScope.ALL:
        return [[v for v in range(g.n) if v != i and v != j]]
    out = []
    for x, y in ((i, j), (j, i)):
        out.append([v for v in g.neighbors(x) if v != y])
    return out


def find_sepset_upto_k(g: PMG, a, b, k: int, scope: SearchScope = SearchScope.ALL):
    """First separating set of size <= k, or ``COVERED``.

    Sets are tried by increasing size, lexicographically by vertex index within
    a size. With ``NEIGHBORS`` the candidates are subsets of the current
    neighbours of ``a`` and then of ``b``.
    """
    i, j = g.index(a), g.index(b)
    if i == j:
        raise ValueError("a and b must differ")
    pools = _candidates(g, i, j, SearchScope(scope))
    for size in range(k + 1):
        tried = set()
        for pool in pools:
            for c in itertools.combinations(pool, size):
                if c in tried:
                    continue
                tried.add(c)
                cm = 0
                for v in c:
                    cm |= 1 << v
                if _separated_idx(g, i, j, cm):
                    return frozenset(c)
    return COVERED


def is_k_covered(g: PMG, a, b, k: int) -> bool:
    """No set of at most ``k`` vertices separates ``a`` and ``b``."""
    if g.adjacent(a, b):
        return True
    return find_sepset_upto_k(g, a, b, k) is COVERED


def separation_statements(g: PMG, k: int) -> frozenset[tuple[int, int, frozenset]]:
    """Every separation ``(a, b, c)`` with ``a < b`` and ``|c| <= k`` that holds in ``g``."""
    out = []
    n = g.n
    for i, j in itertools.combinations(range(n), 2):
        rest = [v for v in range(n) if v != i and v != j]
        for size in range(min(k, len(rest)) + 1):
            for c in itertools.combinations(rest, size):
                cm = 0
                for v in c:
                    cm |= 1 << v
                if _separated_idx(g, i, j, cm):
                    out.append((i, j, frozenset(c)))
    return frozenset(out)


class SepsetTable:
    """Separating sets found for vertex pairs under a bound ``k``.

    Values are frozensets of vertex indices or :data:`COVERED`.
    """

    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k
        self._d: dict[frozenset, object] = {}

    def __setitem__(self, pair: Sequence[int], value) -> None:
        if value is not COVERED:
            value = frozenset(value)
            if len(value) > self.k:
                raise ValueError(f"separating set {set(value)} exceeds bound k={self.k}")
        self._d[frozenset(pair)] = value

    def __getitem__(self, pair: Sequence[int]):
        return self._d[frozenset(pair)]

    def get(self, a: int, b: int, default=None):
        return self._d.get(frozenset((a, b)), default)

    def __contains__(self, pair) -> bool:
        return frozenset(pair) in self._d

    def __len__(self) -> int:
        return len(self._d)

    def items(self):
        return self._d.items()

    def separated_pairs(self) -> list[tuple[int, int]]:
        return sorted(tuple(sorted(p)) for p, v in self._d.items() if v is not COVERED)
