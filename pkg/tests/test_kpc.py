import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dags, fx
from kcd.citest import CountingTester, OracleTester
from kcd.closure import construct_k_closure
from kcd.enumeration import k_essential_oracle, pag_oracle, pmg_subset
from kcd.graphs import ARROW, CIRCLE, PMG, TAIL
from kcd.kpc import (KPCOptions, LearnerState, RuleEvent, fci_orient, kpc_learn, learn_skeleton,
                     orient_unshielded_colliders, replay, rule_r11_r12, run_kpc)
from kcd.separation import COVERED, SepsetTable

pytestmark = pytest.mark.filterwarnings("ignore:k=.*exceeds")


def test_chain5_run_and_pag_snapshot():
    d = fx("chain5")
    assert run_kpc(OracleTester(d), k=0).graph == fx("chain5_kpc0")
    off = run_kpc(OracleTester(d), k=0, options=KPCOptions(step5="off")).graph
    assert off == fx("chain5_pag0")
    assert off == pag_oracle(construct_k_closure(d, 0).graph)


def test_tailrule_and_diamond():
    assert kpc_learn(OracleTester(fx("tailrule")), k=0) == fx("tailrule_kpc0")
    assert kpc_learn(OracleTester(fx("diamond")), k=1) == fx("diamond_kpc1")


def test_tail_rules_use_snapshot():
    # R12 turns a o-o b into a -- b; R11 at b must not see that change
    g = kpc_learn(OracleTester(fx("tailrule")), k=0)
    assert g.mark("b", "c") == ARROW and g.mark("c", "b") == CIRCLE


def test_skeleton_scopes_agree_in_oracle_mode():
    d = fx("diamond")
    a = learn_skeleton(OracleTester(d), d.names, 1, "all").graph
    b = learn_skeleton(OracleTester(d), d.names, 1, "neighbors").graph
    assert a.skeleton() == b.skeleton() == construct_k_closure(d, 1).graph.skeleton()


def test_r1_instance():
    g = PMG("abc", [("a", "b", CIRCLE, ARROW), ("b", "c", CIRCLE, CIRCLE)])
    table = SepsetTable(3, 1)
    table[0, 2] = {1}
    table[0, 1] = table[1, 2] = COVERED
    state = fci_orient(LearnerState(g, table, 1), rules=["R1"])
    assert state.graph.is_directed("b", "c")
    assert [e.rule for e in state.trace] == ["R1", "R1"]


def test_unshielded_collider_step():
    g = PMG.complete("abc", CIRCLE)
    g.remove_edge("a", "c")
    table = SepsetTable(3, 1)
    table[0, 2] = set()
    table[0, 1] = table[1, 2] = COVERED
    state = orient_unshielded_colliders(LearnerState(g, table, 1))
    assert state.graph.mark("a", "b") == ARROW and state.graph.mark("c", "b") == ARROW
    assert state.graph.mark("b", "a") == CIRCLE


def test_step5_rules_on_hand_graph():
    # a has no arrowhead: a o-> b, a o-o c, b and c non-adjacent
    g = PMG("abc", [("a", "b", CIRCLE, ARROW), ("a", "c", CIRCLE, CIRCLE)])
    state = rule_r11_r12(LearnerState(g, SepsetTable(3, 1), 1))
    assert state.graph.is_directed("a", "b")
    assert state.graph.mark("a", "c") == TAIL and state.graph.mark("c", "a") == TAIL


def test_trace_replay_and_json(tmp_path):
    state = run_kpc(OracleTester(fx("chain5")), k=0)
    assert replay(state.skeleton_graph, state.trace) == state.graph
    lines = [e.to_json() for e in state.trace]
    assert [RuleEvent.from_json(x) for x in lines] == state.trace
    assert {e.rule for e in state.trace} >= {"UC", "R11"}


def test_bad_options():
    with pytest.raises(ValueError):
        KPCOptions(step5="sometimes")
    with pytest.raises(ValueError):
        KPCOptions(scope="everything")


@settings(max_examples=40, deadline=None)
@given(dags(min_n=2, max_n=6), st.integers(0, 2))
def test_marks_only_leave_circles(d, k):
    state = run_kpc(OracleTester(d), k=k)
    assert all(e.old == "CIRCLE" for e in state.trace)
    assert not state.conflicts
    off = run_kpc(OracleTester(d), k=k, options=KPCOptions(step5="off")).graph
    assert pmg_subset(state.graph, off)


@settings(max_examples=40, deadline=None)
@given(dags(min_n=2, max_n=6), st.integers(0, 2))
def test_discriminating_colliders_oriented_without_r4(d, k):
    # oracle mode raises InvariantViolation if one is left for R4
    run_kpc(OracleTester(d), k=k, options=KPCOptions(r4=False))


@settings(max_examples=25, deadline=None)
@given(dags(min_n=2, max_n=4), st.integers(0, 2), st.sampled_from(["single", "fixpoint"]))
def test_sandwich_small(d, k, mode):
    k_graph = kpc_learn(OracleTester(d), k=k, step5=mode)
    assert pmg_subset(k_essential_oracle(d, k), k_graph)
    assert pmg_subset(k_graph, pag_oracle(construct_k_closure(d, k).graph))


@settings(max_examples=20, deadline=None)
@given(dags(min_n=4, max_n=8), st.integers(0, 2), st.sampled_from(["all", "neighbors"]))
def test_query_budget(d, k, scope):
    t = CountingTester(OracleTester(d))
    run_kpc(t, k=k, options=KPCOptions(scope=scope))
    n = d.n
    assert t.max_cond <= k
    assert t.calls <= math.comb(n, 2) * sum(math.comb(n - 2, s) for s in range(k + 1)) * 2


def test_complete_and_empty_truth():
    from kcd.graphs import DAG
    empty = DAG("abcd")
    assert kpc_learn(OracleTester(empty), k=1).num_edges() == 0
    full = DAG("abcd", list(itertools.combinations(range(4), 2)))
    g = kpc_learn(OracleTester(full), k=1)
    assert g.num_edges() == 6
