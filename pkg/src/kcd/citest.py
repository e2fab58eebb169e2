"""Conditional independence testers.

Every tester maps a query ``(a, b, cond)`` over variable indices to a
:class:`CiVerdict`. Verdicts are cached on the canonical form of the query, so
asking ``(b, a, cond)`` afterwards costs nothing.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .graphs import DAG
from .separation import is_separated

__all__ = [
    "CiVerdict",
    "Dataset",
    "CITester",
    "OracleTester",
    "GSquareTester",
    "FisherZTester",
    "CountingTester",
    "SingularCorrelationError",
    "make_tester",
    "g_square_statistic",
]

log = logging.getLogger(__name__)


class SingularCorrelationError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class CiVerdict:
    independent: bool
    statistic: float
    p_value: float
    degenerate: bool = False


@dataclass
class Dataset:
    """Column-oriented samples.

    ``data`` has one row per sample. Discrete data holds integer codes in
    ``[0, cardinality)``; ``cardinalities`` defaults to ``max + 1`` per column.
    """

    data: np.ndarray
    names: tuple[str, ...]
    discrete: bool
    cardinalities: tuple[int, ...] | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 2:
            raise ValueError("data must be two-dimensional")
        self.names = tuple(str(x) for x in self.names)
        if len(self.names) != self.data.shape[1]:
            raise ValueError("one name per column required")
        if self.discrete:
            if self.data.size and not np.issubdtype(self.data.dtype, np.integer):
                if not np.all(np.mod(self.data, 1) == 0):
                    raise ValueError("discrete data must hold integer codes")
            self.data = self.data.astype(np.int64)
            if self.data.size and self.data.min() < 0:
                raise ValueError("discrete codes must be non-negative")
            observed = tuple(int(c) + 1 for c in self.data.max(axis=0)) if len(self.data) else \
                (1,) * len(self.names)
            if self.cardinalities is None:
                self.cardinalities = observed
            else:
                self.cardinalities = tuple(int(c) for c in self.cardinalities)
                if any(o > c for o, c in zip(observed, self.cardinalities)):
                    raise ValueError("code outside declared cardinality")
        else:
            self.data = self.data.astype(float)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    def column(self, v) -> np.ndarray:
        return self.data[:, self.index(v)]

    def index(self, v) -> int:
        if isinstance(v, (int, np.integer)):
            return int(v)
        return self.names.index(v)

    @classmethod
    def read_csv(cls, path, discrete: bool | None = None) -> "Dataset":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ValueError(f"{path}: empty file")
        header, body = rows[0], rows[1:]
        if discrete is None:
            discrete = all(_is_int(x) for r in body for x in r)
        values = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), len(header))
        return cls(values.astype(np.int64) if discrete else values, tuple(header), discrete)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.names)
            if self.discrete:
                w.writerows(self.data.tolist())
            else:
                w.writerows([[repr(float(x)) for x in r] for r in self.data])


def _is_int(s: str) -> bool:
    try:
        int(s)
        return True
    except ValueError:
        return False


def _canon(a: int, b: int, cond: Iterable[int]) -> tuple[int, int, tuple[int, ...]]:
    a, b = (a, b) if a < b else (b, a)
    return a, b, tuple(sorted(cond))


class CITester:
    """Base class: subclasses implement :meth:`_compute`."""

    is_oracle = False

    def __init__(self, names: Sequence[str]):
        self.names = tuple(names)
        self._cache: dict = {}
        self.n_queries = 0
        self.n_degenerate = 0

    def index(self, v) -> int:
        if isinstance(v, (int, np.integer)):
            return int(v)
        return self.names.index(v)

    def test(self, a, b, cond: Iterable = ()) -> CiVerdict:
        a, b = self.index(a), self.index(b)
        cond = [self.index(c) for c in cond]
        if a == b:
            raise ValueError("a and b must differ")
        if a in cond or b in cond:
            raise ValueError("conditioning set must exclude a and b")
        key = _canon(a, b, cond)
        hit = self._cache.get(key)
        if hit is None:
            self.n_queries += 1
            hit = self._compute(*key)
            if hit.degenerate:
                self.n_degenerate += 1
            self._cache[key] = hit
        return hit

    def independent(self, a, b, cond: Iterable = ()) -> bool:
        return self.test(a, b, cond).independent

    __call__ = independent

    def _compute(self, a: int, b: int, cond: tuple[int, ...]) -> CiVerdict:
        raise NotImplementedError


class OracleTester(CITester):
    """Answers from d-separation in a known DAG."""

    is_oracle = True

    def __init__(self, dag: DAG):
        super().__init__(dag.names)
        self.dag = dag

    def _compute(self, a, b, cond):
        sep = is_separated(self.dag, a, b, cond)
        return CiVerdict(sep, 0.0 if sep else 1.0, 1.0 if sep else 0.0)


def g_square_statistic(x: np.ndarray, y: np.ndarray, z: np.ndarray | None,
                       cx: int, cy: int, cz: Sequence[int] = (),
                       dof_mode: str = "strata") -> tuple[float, int]:
    """G statistic and degrees of freedom for ``x`` against ``y`` stratified by ``z``.

    With ``dof_mode="strata"`` every stratum holding at least one sample adds
    ``(cx - 1)(cy - 1)`` degrees of freedom. ``"margins"`` also drops levels
    of ``x`` or ``y`` that are empty within a stratum, so a stratum adds
    ``(rx - 1)(ry - 1)`` with ``rx``, ``ry`` the occupied levels.
    """
    if z is None or z.shape[1] == 0:
        strata = np.zeros(len(x), dtype=np.int64)
        n_strata = 1
    else:
        strata = np.ravel_multi_index(z.T, tuple(cz))
        n_strata = int(np.prod(cz))
    idx = (strata * cx + x) * cy + y
    counts = np.bincount(idx, minlength=n_strata * cx * cy).reshape(n_strata, cx, cy).astype(float)
    tot = counts.sum(axis=(1, 2))
    nonempty = tot > 0
    counts = counts[nonempty]
    tot = tot[nonempty]
    expected = counts.sum(axis=2, keepdims=True) * counts.sum(axis=1, keepdims=True) / tot[:, None, None]
    mask = counts > 0
    g = 2.0 * float(np.sum(counts[mask] * np.log(counts[mask] / expected[mask])))
    if dof_mode == "strata":
        dof = (cx - 1) * (cy - 1) * int(nonempty.sum())
    elif dof_mode == "margins":
        rx = (counts.sum(axis=2) > 0).sum(axis=1)
        ry = (counts.sum(axis=1) > 0).sum(axis=1)
        dof = int(np.sum((rx - 1) * (ry - 1)))
    else:
        raise ValueError(f"unknown dof mode {dof_mode!r}")
    return max(g, 0.0), dof


class GSquareTester(CITester):
    """Likelihood-ratio (G squared) test on discrete data.

    ``min_cell_expectation`` > 0 makes sparse tables (samples per cell below
    the threshold) count as independent by convention.
    """

    def __init__(self, data: Dataset, alpha: float = 0.05, min_cell_expectation: float = 0.0,
                 dof_mode: str = "strata"):
        if not data.discrete:
            raise ValueError("G squared test needs discrete data")
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        super().__init__(data.names)
        self.data = data
        self.alpha = alpha
        self.min_cell_expectation = min_cell_expectation
        self.dof_mode = dof_mode
        self._card = data.cardinalities
        self._constant = [len(np.unique(data.data[:, j])) <= 1 for j in range(data.data.shape[1])]

    def _compute(self, a, b, cond):
        d = self.data.data
        if self._constant[a] or self._constant[b]:
            log.debug("constant column in G2 query %s; treating as independent", (a, b, cond))
            return CiVerdict(True, 0.0, 1.0, degenerate=True)
        card = self._card
        cz = [card[c] for c in cond]
        cells = card[a] * card[b] * int(np.prod(cz)) if cz else card[a] * card[b]
        if self.min_cell_expectation and len(d) / cells < self.min_cell_expectation:
            return CiVerdict(True, 0.0, 1.0, degenerate=True)
        g, dof = g_square_statistic(d[:, a], d[:, b], d[:, list(cond)] if cond else None,
                                    card[a], card[b], cz, self.dof_mode)
        if dof <= 0:
            return CiVerdict(True, g, 1.0, degenerate=True)
        p = float(stats.chi2.sf(g, dof))
        return CiVerdict(p >= self.alpha, g, p)


class FisherZTester(CITester):
    """Partial-correlation test with Fisher's z transform, for Gaussian data."""

    def __init__(self, data: Dataset, alpha: float = 0.05):
        if data.discrete:
            raise ValueError("Fisher z test needs continuous data")
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        super().__init__(data.names)
        self.data = data
        self.alpha = alpha
        x = data.data
        self._std = x.std(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            self._corr = np.corrcoef(x, rowvar=False) if x.shape[1] > 1 else np.ones((1, 1))

    def _compute(self, a, b, cond):
        if self._std[a] == 0 or self._std[b] == 0 or any(self._std[c] == 0 for c in cond):
            log.debug("zero-variance column in Fisher z query %s; treating as independent",
                      (a, b, cond))
            return CiVerdict(True, 0.0, 1.0, degenerate=True)
        idx = [a, b, *cond]
        sub = self._corr[np.ix_(idx, idx)]
        if np.linalg.matrix_rank(sub) < len(idx):
            raise SingularCorrelationError(f"singular correlation matrix for {idx}")
        prec = np.linalg.inv(sub)
        r = -prec[0, 1] / math.sqrt(prec[0, 0] * prec[1, 1])
        r = min(max(r, -1 + 1e-12), 1 - 1e-12)
        n = self.data.n_rows
        dof = n - len(cond) - 3
        if dof <= 0:
            return CiVerdict(True, 0.0, 1.0, degenerate=True)
        z = math.sqrt(dof) * math.atanh(r)
        p = float(2 * stats.norm.sf(abs(z)))
        return CiVerdict(p >= self.alpha, z, p)


class CountingTester(CITester):
    """Wraps another tester and records every query it forwards."""

    def __init__(self, inner: CITester):
        super().__init__(inner.names)
        self.inner = inner
        self.is_oracle = inner.is_oracle
        self.max_cond = -1
        self.calls = 0
        self.log: list[tuple[int, int, tuple[int, ...]]] = []

    def test(self, a, b, cond: Iterable = ()) -> CiVerdict:
        cond = tuple(cond)
        self.calls += 1
        self.max_cond = max(self.max_cond, len(cond))
        self.log.append((self.index(a), self.index(b), tuple(self.index(c) for c in cond)))
        return self.inner.test(a, b, cond)


def make_tester(backend: str, *, truth: DAG | None = None, data: Dataset | None = None,
                alpha: float = 0.05, min_cell_expectation: float = 0.0) -> CITester:
    if backend == "oracle":
        if truth is None:
            raise ValueError("oracle backend needs a truth DAG")
        return OracleTester(truth)
    if data is None:
        raise ValueError(f"{backend} backend needs a dataset")
    if backend == "gsq":
        return GSquareTester(data, alpha, min_cell_expectation)
    if backend == "fisherz":
        return FisherZTester(data, alpha)
    raise ValueError(f"unknown CI backend {backend!r}")
