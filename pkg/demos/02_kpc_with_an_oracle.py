"""Run k-PC with a d-separation oracle and compare it to the brute-force
k-essential graph and the PAG of the k-closure.

Run: python3 demos/02_kpc_with_an_oracle.py
"""

from kcd import (OracleTester, construct_k_closure, format_graph, k_essential_oracle, pag_oracle,
                 parse_graph, pmg_subset, run_kpc)
from kcd.kpc import KPCOptions


def block(title, g):
    print(f"--- {title}")
    print(format_graph(g), end="")


d = parse_graph("nodes: a b c u v\nedge: a -> b\nedge: u -> b\nedge: b -> c\nedge: v -> c\n")
k = 0

state = run_kpc(OracleTester(d), k=k)
block("k-PC output", state.graph)
print("rule firings:")
for ev in state.trace:
    print(f"  {ev.rule:>4}: mark at {ev.at} on {ev.other}-{ev.at}: {ev.old} -> {ev.new}")

pag = pag_oracle(construct_k_closure(d, k).graph)
eps = k_essential_oracle(d, k)
block("PAG of the closure", pag)
block("k-essential graph", eps)
print("eps within k-PC:", pmg_subset(eps, state.graph))
print("k-PC within PAG:", pmg_subset(state.graph, pag))

# Without the tail rules the learner stops at the PAG.
off = run_kpc(OracleTester(d), k=k, options=KPCOptions(step5="off")).graph
print("tail rules off gives the PAG:", off == pag)

# An example where the learner is sound but leaves a circle that the
# brute-force union resolves.
d9 = parse_graph("nodes: a b c d\nedge: a -> d\nedge: d -> c\nedge: a -> b\nedge: c -> b\n")
block("k-PC, k=1", run_kpc(OracleTester(d9), k=1).graph)
block("1-essential graph", k_essential_oracle(d9, 1))
