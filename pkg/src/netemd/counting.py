"""Graphlet degree matrices.

:func:`count_orbits` enumerates every connected induced subgraph of size
``<= atlas.max_size`` exactly once with ESU (exclusive-neighbourhood extension
over the underlying undirected adjacency) and classifies it through the atlas'
packed lookup table. :func:`brute_force_count` is the slow, independent oracle.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .atlas import GraphletAtlas, build_atlas, encode
from .errors import CapabilityError, DomainError
from .graph import Graph

BRUTE_FORCE_MAX_NODES = 32


@dataclass(frozen=True, eq=False)
class GraphletDegreeMatrix:
    """Per-node orbit counts: ``counts[i, j]`` is how often node ``i`` sits in orbit ``orbit_ids[j]``."""

    counts: np.ndarray
    directed: bool
    max_size: int
    orbit_ids: np.ndarray = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.orbit_ids is None:
            object.__setattr__(self, "orbit_ids", np.arange(self.counts.shape[1], dtype=np.int64))

    @property
    def values(self) -> np.ndarray:
        return self.counts

    @property
    def node_count(self) -> int:
        return self.counts.shape[0]

    @property
    def orbit_count(self) -> int:
        return self.counts.shape[1]

    @property
    def atlas(self) -> GraphletAtlas:
        return build_atlas(self.directed, self.max_size)

    def column(self, orbit_id: int) -> np.ndarray:
        pos = np.flatnonzero(self.orbit_ids == orbit_id)
        if len(pos) == 0:
            raise DomainError(f"orbit {orbit_id} not present in matrix")
        return self.counts[:, pos[0]]

    def select(self, orbit_ids) -> "GraphletDegreeMatrix":
        cols = _column_positions(self.orbit_ids, orbit_ids)
        return GraphletDegreeMatrix(self.counts[:, cols], self.directed, self.max_size,
                                    np.asarray(orbit_ids, dtype=np.int64), self.name, dict(self.meta))


def _column_positions(have, want) -> np.ndarray:
    lookup = {int(o): i for i, o in enumerate(have)}
    try:
        return np.array([lookup[int(o)] for o in want], dtype=np.int64)
    except KeyError as exc:
        raise DomainError(f"unknown orbit id {exc.args[0]}") from None


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Weighted point set on the real line; support strictly increasing, weights sum to 1."""

    support: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if s.ndim != 1 or s.shape != w.shape or len(s) == 0:
            raise DomainError("distribution needs matching non-empty support and weights")
        if np.any(np.diff(s) <= 0):
            raise DomainError("support must be strictly increasing")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise DomainError("weights must be positive and sum to 1")
        object.__setattr__(self, "support", s)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_samples(cls, values) -> "EmpiricalDistribution":
        support, counts = np.unique(np.asarray(values, dtype=np.float64), return_counts=True)
        return cls(support, counts / counts.sum())

    @classmethod
    def from_weights(cls, mapping: dict) -> "EmpiricalDistribution":
        items = sorted(mapping.items())
        w = np.array([v for _, v in items], dtype=np.float64)
        return cls(np.array([k for k, _ in items], dtype=np.float64), w / w.sum())

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.weights))

    @property
    def variance(self) -> float:
        return float(np.dot((self.support - self.mean) ** 2, self.weights))

    def affine(self, a: float, b: float) -> "EmpiricalDistribution":
        if a <= 0:
            raise DomainError("affine map needs a > 0")
        return EmpiricalDistribution(a * self.support + b, self.weights)


def orbit_histogram(gdm, orbit_id: int) -> EmpiricalDistribution:
    """Share of nodes with each count value of one orbit column."""
    return EmpiricalDistribution.from_samples(gdm.column(orbit_id))


# --------------------------------------------------------------------- kernel

@numba.njit(cache=True, nogil=True, inline="always")
def _has_edge(ptr, idx, a, b):
    lo = ptr[a]
    hi = ptr[a + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = idx[mid]
        if x < b:
            lo = mid + 1
        elif x > b:
            hi = mid
        else:
            return True
    return False


@numba.njit(cache=True, nogil=True)
def _esu_roots(roots, nbr_ptr, nbr_idx, out_ptr, out_idx, directed, k,
               table, offset, counts):
    n = nbr_ptr.shape[0] - 1
    dmax = 0
    for u in range(n):
        d = nbr_ptr[u + 1] - nbr_ptr[u]
        if d > dmax:
            dmax = d
    cap = k * dmax + 1
    ext = np.empty((k + 1, cap), dtype=np.int64)
    ext_len = np.zeros(k + 1, dtype=np.int64)
    cursor = np.zeros(k + 1, dtype=np.int64)
    codes = np.zeros(k + 1, dtype=np.int64)
    sub = np.empty(k, dtype=np.int64)
    mark = np.zeros(n, dtype=np.int32)

    for r in range(roots.shape[0]):
        root = roots[r]
        sub[0] = root
        mark[root] += 1
        nl = 0
        for p in range(nbr_ptr[root], nbr_ptr[root + 1]):
            u = nbr_idx[p]
            mark[u] += 1
            if u > root:
                ext[1, nl] = u
                nl += 1
        ext_len[1] = nl
        cursor[1] = 0
        codes[1] = 0
        depth = 1  # number of nodes currently in sub
        while depth >= 1:
            i = cursor[depth]
            if i >= ext_len[depth]:
                # level exhausted: pop the node added at this depth
                depth -= 1
                if depth >= 1:
                    w = sub[depth]
                    if depth + 1 < k:
                        mark[w] -= 1
                        for p in range(nbr_ptr[w], nbr_ptr[w + 1]):
                            mark[nbr_idx[p]] -= 1
                continue
            cursor[depth] = i + 1
            w = ext[depth, i]
            code = codes[depth]
            for j in range(depth):
                u = sub[j]
                if directed:
                    base = depth * (depth - 1) + 2 * j
                    if _has_edge(out_ptr, out_idx, w, u):
                        code |= 1 << base
                    if _has_edge(out_ptr, out_idx, u, w):
                        code |= 1 << (base + 1)
                else:
                    if _has_edge(out_ptr, out_idx, u, w):
                        code |= 1 << (depth * (depth - 1) // 2 + j)
            sub[depth] = w
            s = depth + 1
            row = offset[s] + code
            for j in range(s):
                counts[sub[j], table[row, j]] += 1
            if s < k:
                nl = 0
                for t in range(i + 1, ext_len[depth]):
                    ext[s, nl] = ext[depth, t]
                    nl += 1
                for p in range(nbr_ptr[w], nbr_ptr[w + 1]):
                    u = nbr_idx[p]
                    if u > root and mark[u] == 0:
                        ext[s, nl] = u
                        nl += 1
                mark[w] += 1
                for p in range(nbr_ptr[w], nbr_ptr[w + 1]):
                    mark[nbr_idx[p]] += 1
                ext_len[s] = nl
                cursor[s] = 0
                codes[s] = code
                depth = s
        mark[root] -= 1
        for p in range(nbr_ptr[root], nbr_ptr[root + 1]):
            mark[nbr_idx[p]] -= 1


def _check_overflow(n: int, k: int) -> None:
    # a node lies in at most C(n-1, s-1) node sets of size s
    bound = sum(math.comb(max(n - 1, 0), s - 1) for s in range(2, k + 1))
    if bound >= 2 ** 63:
        raise CapabilityError(f"orbit counts may overflow int64 for n={n}, k={k}")


def count_orbits(g: Graph, atlas: GraphletAtlas, workers: int = 1, name: str = "") -> GraphletDegreeMatrix:
    """Exact graphlet degree matrix of ``g`` for all orbits of ``atlas``.

    ``workers > 1`` splits the enumeration roots across threads, each with its
    own accumulator; integer addition makes the merge order-independent.
    """
    if atlas.directed != g.directed:
        raise DomainError("atlas and graph directedness differ")
    n, m, k = g.node_count, atlas.orbit_count, atlas.max_size
    _check_overflow(n, k)
    args = (g.nbr_ptr, g.nbr_idx, g.out_ptr, g.out_idx, g.directed, k,
            atlas.orbit_table, atlas.table_offset)
    workers = max(1, min(int(workers), max(n, 1)))
    if workers == 1:
        counts = np.zeros((n, m), dtype=np.int64)
        _esu_roots(np.arange(n, dtype=np.int64), *args, counts)
    else:
        def run(w):
            acc = np.zeros((n, m), dtype=np.int64)
            _esu_roots(np.arange(w, n, workers, dtype=np.int64), *args, acc)
            return acc

        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(workers)))
        counts = parts[0]
        for acc in parts[1:]:
            counts += acc
    return GraphletDegreeMatrix(counts, g.directed, k, name=name)


def brute_force_count(g: Graph, atlas: GraphletAtlas) -> GraphletDegreeMatrix:
    """Enumerate every node subset, keep the connected induced ones, classify, accumulate."""
    if atlas.directed != g.directed:
        raise DomainError("atlas and graph directedness differ")
    n = g.node_count
    if n > BRUTE_FORCE_MAX_NODES:
        raise CapabilityError(f"brute force limited to {BRUTE_FORCE_MAX_NODES} nodes, got {n}")
    edges = g.edge_set()
    und = {frozenset(e) for e in edges}
    counts = np.zeros((n, atlas.orbit_count), dtype=np.int64)
    for s in range(2, atlas.max_size + 1):
        for nodes in itertools.combinations(range(n), s):
            # connectivity by flood fill over undirected pairs
            seen = {nodes[0]}
            frontier = [nodes[0]]
            while frontier:
                a = frontier.pop()
                for b in nodes:
                    if b not in seen and frozenset((a, b)) in und:
                        seen.add(b)
                        frontier.append(b)
            if len(seen) != s:
                continue
            local = [(i, j) for i in range(s) for j in range(s)
                     if i != j and (nodes[i], nodes[j]) in edges]
            if not g.directed:
                local = [(i, j) for i, j in local if i < j]
            _, orbits = atlas.classify(encode(s, local, g.directed), s)
            for node, orbit in zip(nodes, orbits):
                counts[node, orbit] += 1
    return GraphletDegreeMatrix(counts, g.directed, atlas.max_size)
