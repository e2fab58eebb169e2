import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import admgs, dags, fx, path_separated
from kcd.graphs import DAG
from kcd.separation import (COVERED, SearchScope, find_sepset_upto_k, is_k_covered, is_separated,
                            separation_statements)


@settings(max_examples=200)
@given(admgs(min_n=2, max_n=6), st.data())
def test_reachability_matches_path_enumeration(g, data):
    a, b = data.draw(st.sampled_from(list(itertools.permutations(g.names, 2))))
    rest = [v for v in g.names if v not in (a, b)]
    cond = data.draw(st.sets(st.sampled_from(rest)) if rest else st.just(set()))
    assert is_separated(g, a, b, cond) == path_separated(g, a, b, cond)


@given(dags(min_n=2, max_n=6), st.data())
def test_separation_is_symmetric(d, data):
    a, b = data.draw(st.sampled_from(list(itertools.combinations(d.names, 2))))
    rest = [v for v in d.names if v not in (a, b)]
    cond = data.draw(st.sets(st.sampled_from(rest)) if rest else st.just(set()))
    assert is_separated(d, a, b, cond) == is_separated(d, b, a, cond)


def test_chain_fork_collider():
    chain = DAG("abc", [("a", "b"), ("b", "c")])
    coll = DAG("abc", [("a", "b"), ("c", "b")])
    assert not is_separated(chain, "a", "c") and is_separated(chain, "a", "c", {"b"})
    assert is_separated(coll, "a", "c") and not is_separated(coll, "a", "c", {"b"})


def test_descendant_of_collider_opens_path():
    d = DAG("abcd", [("a", "b"), ("c", "b"), ("b", "d")])
    assert not is_separated(d, "a", "c", {"d"})


def test_bad_queries():
    d = DAG("abc", [("a", "b")])
    with pytest.raises(ValueError):
        is_separated(d, "a", "a")
    with pytest.raises(ValueError):
        is_separated(d, "a", "b", {"a"})


def test_sepset_search_order_and_covered():
    # sets come back as vertex indices
    d = fx("latent_pair")
    assert find_sepset_upto_k(d, "c", "d", 1) is COVERED
    assert is_k_covered(d, "c", "d", 1)
    assert find_sepset_upto_k(d, "c", "d", 2) == frozenset(d.indices(["u1", "u2"]))
    # the smallest set is returned, the empty set first
    assert find_sepset_upto_k(d, "u1", "u2", 2) == frozenset()
    assert find_sepset_upto_k(d, "a", "b", 2) == frozenset({d.index("c")})


def test_neighbor_scope_uses_adjacencies():
    d = DAG("abcd", [("a", "b"), ("b", "c"), ("d", "c")])
    assert find_sepset_upto_k(d, "a", "c", 1, SearchScope.NEIGHBORS) == frozenset({d.index("b")})


@given(dags(min_n=2, max_n=5), st.integers(0, 2))
def test_statements_are_exactly_the_small_separations(d, k):
    stmts = separation_statements(d, k)
    k = min(k, max(d.n - 2, 0))
    for i, j in itertools.combinations(range(d.n), 2):
        rest = [v for v in range(d.n) if v not in (i, j)]
        for s in range(k + 1):
            for c in itertools.combinations(rest, s):
                sep = is_separated(d, i, j, c)
                assert sep == ((i, j, frozenset(c)) in stmts)
