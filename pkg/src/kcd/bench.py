"""Synthetic models, forward sampling, F1 scoring and the experiment driver."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from importlib import resources
from typing import Sequence

import numpy as np

from .citest import Dataset, FisherZTester, GSquareTester
from .graphs import ARROW, DAG, TAIL, PMG, parse_graph
from .kpc import KPCOptions, kpc_learn
from .pc import cpdag, pc_stable_learn

__all__ = [
    "BayesNet",
    "LinearScm",
    "ScoreReport",
    "Counts",
    "ExperimentConfig",
    "random_dag",
    "random_bayes_net",
    "random_linear_scm",
    "sample_discrete",
    "sample_linear",
    "score",
    "f1",
    "run_experiment",
    "write_rows",
    "substream",
    "asia_structure",
    "CSV_HEADER",
]

log = logging.getLogger(__name__)

CSV_HEADER = ("instance", "dataset", "learner", "k", "N",
              "arrowhead_f1", "tail_f1", "skeleton_f1", "errors")


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the substream ``key`` of ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _names(n: int) -> tuple[str, ...]:
    return tuple(f"x{i}" for i in range(n))


def random_dag(n: int, max_edges: int, rng: np.random.Generator, names=None) -> DAG:
    """Random DAG over a uniformly random topological order.

    Each forward pair is an edge with probability ``max_edges / C(n, 2)``;
    surplus edges beyond ``max_edges`` are dropped at random.
    """
    pairs = n * (n - 1) // 2
    if max_edges < 0 or max_edges > pairs:
        raise ValueError(f"max_edges must lie in [0, {pairs}]")
    names = tuple(names) if names is not None else _names(n)
    order = rng.permutation(n)
    p = max_edges / pairs if pairs else 0.0
    cand = [(int(order[i]), int(order[j])) for i in range(n) for j in range(i + 1, n)]
    keep = [e for e, u in zip(cand, rng.random(len(cand))) if u < p]
    if len(keep) > max_edges:
        idx = np.sort(rng.choice(len(keep), size=max_edges, replace=False))
        keep = [keep[i] for i in idx]
    return DAG(names, keep)


@dataclass
class BayesNet:
    """Discrete network; ``cpts[v]`` has one row per parent configuration
    (row-major over ``dag.parents(v)`` in index order) and one column per state."""

    dag: DAG
    states: tuple[int, ...]
    cpts: list[np.ndarray]

    def __post_init__(self):
        self.states = tuple(int(s) for s in self.states)
        for v in range(self.dag.n):
            t = np.asarray(self.cpts[v], dtype=float)
            rows = int(np.prod([self.states[p] for p in self.dag.parents(v)]))
            if t.shape != (rows, self.states[v]):
                raise ValueError(f"CPT of {self.dag.names[v]} has shape {t.shape}, "
                                 f"expected {(rows, self.states[v])}")
            if (t < 0).any() or not np.allclose(t.sum(axis=1), 1.0, atol=1e-9):
                raise ValueError(f"CPT rows of {self.dag.names[v]} must be distributions")
            self.cpts[v] = t

    @classmethod
    def from_json(cls, dag: DAG, text: str) -> "BayesNet":
        """Read CPTs given as ``{var: {"states": s, "table": [[...], ...]}}``."""
        spec = json.loads(text)
        missing = set(dag.names) - set(spec)
        if missing:
            raise ValueError(f"no CPT for {sorted(missing)}")
        states = [int(spec[v].get("states", len(spec[v]["table"][0]))) for v in dag.names]
        return cls(dag, states, [np.asarray(spec[v]["table"], dtype=float) for v in dag.names])

    def to_json(self) -> str:
        return json.dumps({v: {"states": self.states[i],
                               "parents": [self.dag.names[p] for p in self.dag.parents(i)],
                               "table": self.cpts[i].tolist()}
                           for i, v in enumerate(self.dag.names)}, indent=1)


@dataclass
class LinearScm:
    """Linear Gaussian model: ``x_j = sum_i w[i, j] x_i + e_j`` with unit-variance noise."""

    dag: DAG
    weights: np.ndarray
    coef_range: tuple[float, float] = (-3.0, 3.0)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        lo, hi = self.coef_range
        n = self.dag.n
        if self.weights.shape != (n, n):
            raise ValueError("weights must be n x n")
        for i in range(n):
            for j in range(n):
                w = self.weights[i, j]
                if w and not self.dag.is_directed(i, j):
                    raise ValueError("non-zero weight on a missing edge")
                if not lo <= w <= hi:
                    raise ValueError("weight outside coefficient range")


def random_bayes_net(dag: DAG, states: int | Sequence[int], rng: np.random.Generator) -> BayesNet:
    """CPT rows drawn uniformly from the probability simplex."""
    if isinstance(states, int):
        states = [states] * dag.n
    cpts = []
    for v in range(dag.n):
        rows = int(np.prod([states[p] for p in dag.parents(v)]))
        cpts.append(rng.dirichlet(np.ones(states[v]), size=rows))
    return BayesNet(dag, states, cpts)


def random_linear_scm(dag: DAG, rng: np.random.Generator,
                      coef_range: tuple[float, float] = (-3.0, 3.0)) -> LinearScm:
    w = np.zeros((dag.n, dag.n))
    for i, j in dag.arcs():
        w[i, j] = rng.uniform(*coef_range)
    return LinearScm(dag, w, coef_range)


def sample_discrete(bn: BayesNet, n_rows: int, rng: np.random.Generator) -> Dataset:
    d = bn.dag
    x = np.zeros((n_rows, d.n), dtype=np.int64)
    for v in d.topological_order():
        pa = d.parents(v)
        if pa:
            row = np.ravel_multi_index(x[:, pa].T, [bn.states[p] for p in pa])
        else:
            row = np.zeros(n_rows, dtype=np.int64)
        cum = np.cumsum(bn.cpts[v][row], axis=1)
        u = rng.random(n_rows)
        x[:, v] = np.minimum((u[:, None] >= cum).sum(axis=1), bn.states[v] - 1)
    return Dataset(x, d.names, True, bn.states)


def sample_linear(scm: LinearScm, n_rows: int, rng: np.random.Generator) -> Dataset:
    d = scm.dag
    x = np.zeros((n_rows, d.n))
    for v in d.topological_order():
        x[:, v] = x @ scm.weights[:, v] + rng.standard_normal(n_rows)
    return Dataset(x, d.names, False)


# -- scoring -------------------------------------------------------------------

@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def f1(self) -> float:
        return f1(self.tp, self.fp, self.fn)


def f1(tp: int, fp: int, fn: int) -> float:
    """2tp / (2tp + fp + fn), and 1.0 when there is nothing to find or predict."""
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2 * tp / denom


@dataclass(frozen=True)
class ScoreReport:
    arrowhead: Counts
    tail: Counts
    skeleton: Counts
    mode: str

    @property
    def arrowhead_f1(self) -> float:
        return self.arrowhead.f1

    @property
    def tail_f1(self) -> float:
        return self.tail.f1

    @property
    def skeleton_f1(self) -> float:
        return self.skeleton.f1


def _mark_counts(pred, ref, n: int, mark) -> Counts:
    tp = fp = fn = 0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            p = pred[i][j] == mark
            r = ref[i][j] == mark
            tp += p and r
            fp += p and not r
            fn += r and not p
    return Counts(tp, fp, fn)


def score(pred: PMG, truth: PMG, mode: str = "dag") -> ScoreReport:
    """F1 counts per endpoint mark. ``mode`` is ``dag`` (compare against the
    truth itself) or ``essential`` (against its CPDAG). Circles never count as
    predictions."""
    if set(pred.names) != set(truth.names):
        raise ValueError("graphs are on different vertex sets")
    if pred.names != truth.names:
        pred = pred.reordered(truth.names)
    if mode in ("essential", "EssentialGraph"):
        ref = cpdag(DAG(truth.names, truth.edges()))
        mode = "essential"
    elif mode in ("dag", "TrueDag"):
        ref = truth
        mode = "dag"
    else:
        raise ValueError(f"unknown reference mode {mode!r}")
    n = truth.n
    sp, sr = pred.skeleton(), ref.skeleton()
    skel = Counts(len(sp & sr), len(sp - sr), len(sr - sp))
    return ScoreReport(_mark_counts(pred.m, ref.m, n, ARROW),
                       _mark_counts(pred.m, ref.m, n, TAIL), skel, mode)


# -- experiment driver ------------------------------------------------------------

def _parse_list(s: str, conv) -> list:
    return [conv(x) for x in s.replace(";", ",").split(",") if x.strip()]


@dataclass
class ExperimentConfig:
    n: int = 10
    max_edges: int = 15
    states: int = 2
    model: str = "discrete"  # discrete | linear
    n_samples: list[int] = field(default_factory=lambda: [50, 100])
    k: list[int] = field(default_factory=lambda: [0, 1, 2])
    learners: list[str] = field(default_factory=lambda: ["kpc", "pc"])
    repetitions: int = 100
    datasets: int = 3
    seed: int = 0
    reference: str = "essential"
    alpha: float = 0.05
    step5: str = "single"
    scope: str = "all"
    pc_depth: int | None = None
    output: str | None = None

    _lists = {"n_samples": int, "k": int, "learners": str}
    _aliases = {"N": "n_samples", "instances": "repetitions", "out": "output"}

    def __post_init__(self):
        if self.model not in ("discrete", "linear"):
            raise ValueError("model must be discrete or linear")
        bad = set(self.learners) - {"kpc", "pc"}
        if bad:
            raise ValueError(f"unknown learners {sorted(bad)}")
        if self.repetitions < 0 or self.datasets < 1:
            raise ValueError("repetitions must be >= 0 and datasets >= 1")

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        """Read ``key = value`` lines; lists are comma separated, ``#`` starts a comment."""
        known = {f.name: f for f in fields(cls)}
        kw = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = cls._aliases.get(key, key)
            if key not in known:
                raise ValueError(f"line {lineno}: unknown key {key!r}")
            if key in cls._lists:
                kw[key] = _parse_list(val, cls._lists[key])
            elif key in ("alpha",):
                kw[key] = float(val)
            elif key in ("model", "reference", "step5", "scope", "output"):
                kw[key] = val
            elif key == "pc_depth":
                kw[key] = None if val.lower() in ("", "none") else int(val)
            else:
                kw[key] = int(val)
        return cls(**kw)

    @classmethod
    def read(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.parse(fh.read())

    def learner_runs(self) -> list[tuple[str, int | None]]:
        runs = []
        for name in self.learners:
            if name == "kpc":
                runs += [("kpc", k) for k in self.k]
            else:
                runs.append(("pc", self.pc_depth))
        return runs


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.6f}"


def _run_instance(cfg: ExperimentConfig, inst: int) -> list[tuple]:
    rng = substream(cfg.seed, inst, 0)
    dag = random_dag(cfg.n, cfg.max_edges, rng)
    if cfg.model == "discrete":
        model = random_bayes_net(dag, cfg.states, rng)
    else:
        model = random_linear_scm(dag, rng)
    rows = []
    for ds in range(cfg.datasets):
        for size in cfg.n_samples:
            drng = substream(cfg.seed, inst, 1 + ds, size)
            if cfg.model == "discrete":
                data = sample_discrete(model, size, drng)
                tester_fn = lambda: GSquareTester(data, cfg.alpha)  # noqa: E731
            else:
                data = sample_linear(model, size, drng)
                tester_fn = lambda: FisherZTester(data, cfg.alpha)  # noqa: E731
            for learner, k in cfg.learner_runs():
                err = ""
                try:
                    tester = tester_fn()
                    if learner == "kpc":
                        pred = kpc_learn(tester, k=k, options=KPCOptions(scope=cfg.scope, step5=cfg.step5))
                    else:
                        pred = pc_stable_learn(tester, max_depth=k)
                    rep = score(pred, dag, cfg.reference)
                    vals = (rep.arrowhead_f1, rep.tail_f1, rep.skeleton_f1)
                except Exception as exc:  # recorded per row, the run goes on
                    log.warning("instance %d dataset %d %s failed: %s", inst, ds, learner, exc)
                    err = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
                    vals = (math.nan,) * 3
                rows.append((inst, ds, learner, "" if k is None else k, size,
                             *(_fmt(v) for v in vals), err))
    return rows


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> list[tuple]:
    """One row per (instance, dataset, learner run, sample size), ordered by instance."""
    insts = range(cfg.repetitions)
    if threads > 1 and cfg.repetitions > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_instance, [cfg] * cfg.repetitions, insts))
    else:
        chunks = [_run_instance(cfg, i) for i in insts]
    rows = [r for c in chunks for r in c]
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            write_rows(rows, fh)
    return rows


def write_rows(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    write_rows(rows, buf)
    return buf.getvalue()


def asia_structure() -> DAG:
    """Structure of the 8-variable Asia network (no parameters)."""
    text = resources.files("kcd").joinpath("data/asia.graph").read_text()
    return parse_graph(text, DAG)


def default_threads() -> int:
    env = os.environ.get("KCD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
