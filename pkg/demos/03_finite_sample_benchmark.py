"""Small finite-sample comparison of k-PC and PC-stable on random binary
networks, plus one learning run on the Asia structure.

Run: python3 demos/03_finite_sample_benchmark.py [repetitions]
"""

import collections
import statistics
import sys

from kcd import GSquareTester, format_graph
from kcd.bench import (ExperimentConfig, asia_structure, random_bayes_net, run_experiment,
                       sample_discrete, score, substream)
from kcd.kpc import kpc_learn
from kcd.pc import pc_stable_learn

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 20

cfg = ExperimentConfig(n=10, max_edges=15, n_samples=[50, 500], k=[0, 1, 2], repetitions=reps,
                       datasets=2, seed=0, scope="neighbors")
rows = run_experiment(cfg)
acc = collections.defaultdict(list)
for r in rows:
    acc[(r[4], r[2], r[3])].append([float(x) for x in r[5:8]])
print(f"{'N':>4} {'learner':>8} {'arrow':>7} {'tail':>7} {'skel':>7}")
for (n, learner, k), vals in sorted(acc.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]))):
    means = [statistics.fmean(v[i] for v in vals) for i in range(3)]
    name = f"kpc{k}" if learner == "kpc" else "pc"
    print(f"{n:>4} {name:>8} " + " ".join(f"{m:7.3f}" for m in means))

# Asia: random binary CPTs, 5000 rows.
asia = asia_structure()
bn = random_bayes_net(asia, 2, substream(1, 0))
data = sample_discrete(bn, 5000, substream(1, 1))
for label, g in (("k-PC (k=1)", kpc_learn(GSquareTester(data), k=1)),
                 ("PC-stable", pc_stable_learn(GSquareTester(data)))):
    rep = score(g, asia, "essential")
    print(f"--- {label}: arrowhead F1 {rep.arrowhead_f1:.3f}, skeleton F1 {rep.skeleton_f1:.3f}")
    print(format_graph(g), end="")
