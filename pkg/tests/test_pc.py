import numpy as np
from hypothesis import given, settings

from conftest import dags, fx
from kcd.citest import Dataset, GSquareTester, OracleTester
from kcd.enumeration import enumerate_dags, essential_graph_oracle
from kcd.graphs import PMG, TAIL
from kcd.pc import cpdag, meek_closure, pc_stable_learn


def test_cpdag_matches_enumerated_essential_graph():
    for d in enumerate_dags(4):
        assert cpdag(d) == essential_graph_oracle(d)


@settings(max_examples=60, deadline=None)
@given(dags(min_n=1, max_n=7))
def test_pc_stable_oracle_recovers_cpdag(d):
    assert pc_stable_learn(OracleTester(d)) == cpdag(d)


def test_diamond_pc_and_cpdag():
    d = fx("diamond")
    expect = PMG(d.names, [("a", "b", TAIL, 2), ("c", "b", TAIL, 2),
                           ("a", "d", TAIL, TAIL), ("c", "d", TAIL, TAIL)])
    assert cpdag(d) == expect
    assert pc_stable_learn(OracleTester(d)) == expect


def test_meek_r1_chain():
    g = PMG("abc", [("a", "b", TAIL, 2), ("b", "c", TAIL, TAIL)])
    assert meek_closure(g).is_directed("b", "c")


def test_depth_limit_keeps_edges():
    d = fx("latent_pair")
    g = pc_stable_learn(OracleTester(d), max_depth=1)
    # c and d need both u1 and u2 to be separated
    assert g.adjacent("c", "d")
    assert not pc_stable_learn(OracleTester(d)).adjacent("c", "d")


def test_empty_and_constant_data():
    data = Dataset(np.zeros((30, 3), dtype=int), "abc", True)
    assert pc_stable_learn(GSquareTester(data)).num_edges() == 0
    empty = Dataset(np.zeros((0, 3), dtype=int), "abc", True)
    assert pc_stable_learn(GSquareTester(empty)).num_edges() == 0
