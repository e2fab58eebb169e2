import itertools
from pathlib import Path

import networkx as nx
import pytest
from hypothesis import strategies as st

from kcd.graphs import ARROW, DAG, TAIL, MixedGraph, read_graph

FIXTURES = Path(__file__).parent / "fixtures"


def fx(name, kind=None):
    return read_graph(FIXTURES / f"{name}.graph", kind)


@pytest.fixture
def load():
    return fx


# -- strategies ----------------------------------------------------------------

@st.composite
def dags(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    order = draw(st.permutations(range(n)))
    pairs = [(order[i], order[j]) for i in range(n) for j in range(i + 1, n)]
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    names = [f"v{i}" for i in range(n)]
    return DAG(names, [p for p, b in zip(pairs, keep) if b])


@st.composite
def admgs(draw, min_n=1, max_n=6):
    """Mixed graphs whose directed part is acyclic."""
    d = draw(dags(min_n, max_n))
    edges = list(d.edges())
    for i, j in itertools.combinations(range(d.n), 2):
        if not d.m[i][j] and draw(st.integers(0, 3)) == 0:
            edges.append((i, j, ARROW, ARROW))
    return MixedGraph(d.names, edges)


# -- independent separation oracle ------------------------------------------------

def path_separated(g, a, b, cond):
    """m-separation by enumerating every simple path of the skeleton."""
    a, b = g.index(a), g.index(b)
    cond = {g.index(c) for c in cond}
    und = nx.Graph()
    und.add_nodes_from(range(g.n))
    directed = nx.DiGraph()
    directed.add_nodes_from(range(g.n))
    for i, j, mi, mj in g.edges():
        und.add_edge(i, j)
        if mi == TAIL and mj == ARROW:
            directed.add_edge(i, j)
        elif mj == TAIL and mi == ARROW:
            directed.add_edge(j, i)
    an = set(cond)
    for c in cond:
        an |= nx.ancestors(directed, c)
    for path in nx.all_simple_paths(und, a, b):
        open_ = True
        for x, y, z in zip(path, path[1:], path[2:]):
            collider = g.m[x][y] == ARROW and g.m[z][y] == ARROW
            if collider and y not in an or not collider and y in cond:
                open_ = False
                break
        if open_:
            return False
    return True


# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
