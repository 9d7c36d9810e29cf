"""Scoring a distance matrix against known categories: P-bar, AUPR and ARI."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError

EPSILON_GRID = np.linspace(0.0, 1.0, 201)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Distance matrix plus one category per row; ``groups`` holds optional keys per row."""

    distances: np.ndarray
    categories: tuple
    groups: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(getattr(self.distances, "values", self.distances), dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DomainError("distance matrix must be square")
        if len(self.categories) != d.shape[0]:
            raise DomainError(f"{len(self.categories)} labels for a {d.shape[0]}x{d.shape[0]} matrix")
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "categories", tuple(self.categories))

    @property
    def size(self) -> int:
        return len(self.categories)

    def codes(self) -> np.ndarray:
        """Integer category codes in order of first appearance."""
        index = {}
        return np.array([index.setdefault(c, len(index)) for c in self.categories], dtype=np.int64)

    def check(self) -> None:
        counts = Counter(self.categories)
        if len(counts) < 2:
            raise DomainError("need at least two categories")
        single = sorted(str(c) for c, n in counts.items() if n < 2)
        if single:
            raise DomainError(f"category {single[0]!r} has a single member")

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.distances[np.ix_(idx, idx)], [self.categories[i] for i in idx],
                              {k: [v[i] for i in idx] for k, v in self.groups.items()})

    def split(self, keys) -> dict:
        """Partition rows by the tuple of ``groups[key]`` values."""
        if not keys:
            return {(): self}
        missing = [k for k in keys if k not in self.groups]
        if missing:
            raise DomainError(f"no grouping column {missing[0]!r}")
        parts: dict = {}
        for i in range(self.size):
            parts.setdefault(tuple(self.groups[k][i] for k in keys), []).append(i)
        return {key: self.subset(idx) for key, idx in parts.items()}


# -------------------------------------------------------------------- P-bar

def p_values(ds: LabeledDataset) -> np.ndarray:
    """P(G) per network: share of (same, different) category pairs where the
    same-category network is strictly closer; ties count one half."""
    ds.check()
    d, codes = ds.distances, ds.codes()
    out = np.empty(ds.size)
    for i in range(ds.size):
        same = codes == codes[i]
        same[i] = False
        s = d[i, same]
        o = np.sort(d[i, codes != codes[i]])
        less = len(o) - np.searchsorted(o, s, side="right")
        ties = np.searchsorted(o, s, side="right") - np.searchsorted(o, s, side="left")
        out[i] = (less.sum() + 0.5 * ties.sum()) / (len(s) * len(o))
    return out


def p_bar(ds: LabeledDataset) -> float:
    return float(p_values(ds).mean())


def mean_and_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if len(v) < 2:
        raise DomainError("standard error needs at least two values")
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def task1_report(groups, metric=None) -> dict:
    """Score each group and report the mean and standard error across groups.

    ``groups`` is a mapping of key to dataset (or a plain sequence of datasets).
    """
    metric = metric or p_bar
    if not isinstance(groups, dict):
        groups = dict(enumerate(groups))
    if len(groups) < 2:
        raise DomainError("need at least two groups")
    per = {key: metric(ds) for key, ds in groups.items()}
    mean, se = mean_and_se(list(per.values()))
    return {"mean": mean, "se": se, "groups": per}


# --------------------------------------------------------------------- AUPR

def _pairs(ds: LabeledDataset) -> tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(ds.size, k=1)
    codes = ds.codes()
    return ds.distances[iu], codes[iu[0]] == codes[iu[1]]


def pr_curve(ds: LabeledDataset, grid=EPSILON_GRID) -> tuple[np.ndarray, np.ndarray]:
    """(recall, precision) at each threshold on min-max normalised distances.

    A pair is predicted to share a category when its distance is below the
    threshold; the final threshold 1 is inclusive so the sweep ends with every
    pair predicted positive.
    """
    ds.check()
    d, truth = _pairs(ds)
    lo, hi = d.min(), d.max()
    if hi == lo:
        raise DomainError("all distances are identical; precision-recall is undefined")
    d = (d - lo) / (hi - lo)
    pos = truth.sum()
    recall = np.empty(len(grid))
    precision = np.empty(len(grid))
    for t, eps in enumerate(grid):
        pred = d <= eps if eps >= 1.0 else d < eps
        tp = np.sum(pred & truth)
        fp = np.sum(pred & ~truth)
        recall[t] = tp / pos
        precision[t] = tp / (tp + fp) if tp + fp else 1.0
    return recall, precision


def aupr(ds: LabeledDataset) -> float:
    recall, precision = pr_curve(ds)
    order = np.argsort(recall, kind="stable")
    return float(trapezoid(precision[order], recall[order]))


# ---------------------------------------------------------------------- ARI

def complete_linkage(distances, n_clusters: int) -> np.ndarray:
    """Agglomerative clustering with maximum linkage, cut at ``n_clusters``.

    Ties between equally close cluster pairs go to the pair with the smallest
    (row, column) index, clusters being indexed by their smallest member.
    Returns cluster ids numbered by first appearance.
    """
    d = np.array(getattr(distances, "values", distances), dtype=np.float64)
    n = d.shape[0]
    if not 1 <= n_clusters <= n:
        raise DomainError(f"cannot cut {n} items into {n_clusters} clusters")
    owner = np.arange(n)
    active = np.ones(n, dtype=bool)
    np.fill_diagonal(d, np.inf)
    for _ in range(n - n_clusters):
        masked = np.where(active[:, None] & active[None, :], d, np.inf)
        flat = int(np.argmin(masked))  # row-major: smallest (i, j) among ties
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        merged = np.maximum(d[i], d[j])
        d[i, :] = merged
        d[:, i] = merged
        d[i, i] = np.inf
        active[j] = False
        owner[owner == j] = i
    _, labels = np.unique(owner, return_inverse=True)
    first = {}
    return np.array([first.setdefault(x, len(first)) for x in labels], dtype=np.int64)


def adjusted_rand_index(truth, pred) -> float:
    truth = np.asarray(truth)
    pred = np.asarray(pred)
    n = len(truth)
    _, t = np.unique(truth, return_inverse=True)
    _, p = np.unique(pred, return_inverse=True)
    table = np.zeros((t.max() + 1, p.max() + 1), dtype=np.int64)
    np.add.at(table, (t, p), 1)

    def c2(x):
        x = np.asarray(x, dtype=np.float64)
        return x * (x - 1) / 2

    index = c2(table).sum()
    sa, sb = c2(table.sum(axis=1)).sum(), c2(table.sum(axis=0)).sum()
    expected = sa * sb / c2(n)
    denom = 0.5 * (sa + sb) - expected
    if denom == 0:
        return 1.0
    return float((index - expected) / denom)


def ari(ds: LabeledDataset) -> float:
    ds.check()
    codes = ds.codes()
    clusters = complete_linkage(ds.distances, len(np.unique(codes)))
    return adjusted_rand_index(codes, clusters)


METRICS = {"pbar": p_bar, "aupr": aupr, "ari": ari}
