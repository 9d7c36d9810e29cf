"""Simple directed/undirected graphs with CSR adjacency, edge-list I/O and basic statistics."""

from __future__ import annotations

import io
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .errors import DomainError, ParseError

log = logging.getLogger(__name__)

_NODES_HEADER = re.compile(r"^#\s*nodes\s*=\s*(\d+)\s*$")


def _csr(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(ptr, src + 1, 1)
    np.cumsum(ptr, out=ptr)
    return ptr, np.ascontiguousarray(dst, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple graph on nodes ``0..node_count-1``.

    ``edges`` is an ``(E, 2)`` int64 array sorted lexicographically. Undirected
    graphs store every edge once with ``u < v``. Use :meth:`from_edges` to build
    one from arbitrary (possibly dirty) pairs.
    """

    directed: bool
    node_count: int
    edges: np.ndarray
    labels: tuple | None = None
    dropped: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.node_count
        e = self.edges
        u, v = e[:, 0], e[:, 1]
        if self.directed:
            out_ptr, out_idx = _csr(n, u, v)
            in_ptr, in_idx = _csr(n, v, u)
            # underlying undirected neighbourhood N(u)
            a = np.concatenate([u, v])
            b = np.concatenate([v, u])
            key = np.unique(a * max(n, 1) + b)
            nbr_ptr, nbr_idx = _csr(n, key // max(n, 1), key % max(n, 1))
        else:
            nbr_ptr, nbr_idx = _csr(n, np.concatenate([u, v]), np.concatenate([v, u]))
            out_ptr, out_idx, in_ptr, in_idx = nbr_ptr, nbr_idx, nbr_ptr, nbr_idx
        for name, arr in [
            ("out_ptr", out_ptr), ("out_idx", out_idx),
            ("in_ptr", in_ptr), ("in_idx", in_idx),
            ("nbr_ptr", nbr_ptr), ("nbr_idx", nbr_idx),
        ]:
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        e.setflags(write=False)

    @classmethod
    def from_edges(cls, node_count: int, pairs, directed: bool, labels=None) -> "Graph":
        """Build a graph, silently dropping self-loops and duplicate pairs.

        The number of dropped items is recorded in ``graph.dropped``.
        """
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= node_count):
            raise DomainError("edge endpoint outside [0, node_count)")
        loops = arr[:, 0] == arr[:, 1]
        n_loops = int(loops.sum())
        arr = arr[~loops]
        if not directed:
            arr = np.sort(arr, axis=1)
        total = len(arr)
        if total:
            arr = np.unique(arr, axis=0)
        else:
            arr = np.empty((0, 2), dtype=np.int64)
        dropped = {"self_loops": n_loops, "duplicates": total - len(arr)}
        return cls(bool(directed), int(node_count), np.ascontiguousarray(arr), labels, dropped)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def out_neighbors(self, u: int) -> np.ndarray:
        return self.out_idx[self.out_ptr[u]:self.out_ptr[u + 1]]

    def in_neighbors(self, u: int) -> np.ndarray:
        return self.in_idx[self.in_ptr[u]:self.in_ptr[u + 1]]

    def neighbors(self, u: int) -> np.ndarray:
        """N(u): nodes joined to ``u`` by an edge in either direction."""
        return self.nbr_idx[self.nbr_ptr[u]:self.nbr_ptr[u + 1]]

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def degree(self) -> np.ndarray:
        """Undirected: |N(u)|. Directed: in-degree plus out-degree."""
        if self.directed:
            return self.out_degree() + self.in_degree()
        return np.diff(self.nbr_ptr)

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.out_neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))

    def average_degree(self) -> float:
        if self.node_count == 0:
            return 0.0
        # directed degree is in + out, so the mean is 2|E|/n in both cases
        return 2.0 * self.edge_count / self.node_count

    def relabel(self, perm) -> "Graph":
        """Return the graph with node ``i`` renamed ``perm[i]``."""
        perm = np.asarray(perm, dtype=np.int64)
        return Graph.from_edges(self.node_count, perm[self.edges], self.directed)

    def with_isolated(self, extra: int) -> "Graph":
        return Graph.from_edges(self.node_count + extra, self.edges, self.directed)

    def to_undirected(self) -> "Graph":
        return Graph.from_edges(self.node_count, self.edges, directed=False)


def density(g: Graph) -> float:
    n = g.node_count
    if n < 2:
        raise DomainError(f"density needs at least 2 nodes, got {n}")
    pairs = n * (n - 1) if g.directed else n * (n - 1) / 2
    return g.edge_count / pairs


def reciprocity(g: Graph) -> float:
    """Fraction of directed edges (a, b) whose reverse (b, a) is also present."""
    if not g.directed:
        raise DomainError("reciprocity is defined for directed graphs only")
    if g.edge_count == 0:
        raise DomainError("reciprocity of a graph without edges is undefined")
    n = g.node_count
    fwd = g.edges[:, 0] * n + g.edges[:, 1]
    rev = g.edges[:, 1] * n + g.edges[:, 0]
    return float(np.isin(rev, fwd, assume_unique=True).sum()) / g.edge_count


def load_edge_list(stream: TextIO | str | Iterable[str], directed: bool) -> Graph:
    """Parse a whitespace-separated edge list.

    Node labels are remapped to 0..n-1 in order of first appearance; the
    original labels are kept in ``graph.labels``. A leading ``# nodes=N``
    comment (as written by :func:`write_edge_list`) switches to identity
    mapping of integer labels and keeps isolated nodes.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    index: dict[str, int] = {}
    pairs = []
    declared = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _NODES_HEADER.match(line)
            if m and not pairs and declared is None:
                declared = int(m.group(1))
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 tokens, found {len(tokens)}", lineno)
        pair = []
        for tok in tokens:
            if tok not in index:
                index[tok] = len(index)
            pair.append(index[tok])
        pairs.append(pair)

    if declared is not None and all(t.isdigit() and int(t) < declared for t in index):
        ids = np.array([int(t) for t in index], dtype=np.int64)
        remapped = ids[np.asarray(pairs, dtype=np.int64).reshape(-1, 2)] if pairs else []
        g = Graph.from_edges(declared, remapped, directed, labels=tuple(range(declared)))
    else:
        g = Graph.from_edges(len(index), pairs, directed, labels=tuple(index))
    if g.dropped["self_loops"] or g.dropped["duplicates"]:
        log.info("dropped %d self-loops and %d duplicate edges",
                 g.dropped["self_loops"], g.dropped["duplicates"])
    return g


def write_edge_list(g: Graph, stream: TextIO) -> None:
    stream.write(f"# nodes={g.node_count}\n")
    for u, v in g.edges.tolist():
        stream.write(f"{u} {v}\n")


def read_graph(path, directed: bool) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh, directed)


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_edge_list(g, fh)
