"""Graphlet atlas: every connected (di)graph on 2..k nodes with its automorphism orbits.

Adjacency codes
---------------
A labeled graph on positions ``0..s-1`` is encoded as an integer. For an
undirected graph the pair ``i < j`` owns bit ``j*(j-1)//2 + i``. For a digraph
the pair ``i < j`` owns bits ``j*(j-1) + 2*i`` (edge ``j -> i``) and the next one
(edge ``i -> j``). A code of size ``s`` is therefore a prefix of the code of any
graph obtained by appending a node, which is what the counting kernel relies on.

The adjacency bit-string of a code lists its bits from bit 0 upwards. The
canonical code of a graphlet is the labeling whose bit-string is
lexicographically smallest over all node permutations. Graphlets are ordered by
``(size, canonical bit-string)``; orbits inside a graphlet by their smallest
canonical position; orbit ids are global and consecutive. With this convention
orbit 0 is the undirected edge endpoint, directed orbits 0/1/2 are the tail, head
and reciprocal endpoint, and undirected orbits 1/2/3 are the path end, path
centre and triangle node.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, DomainError

DIRECTED_SIZE5_ORBITS = 45637

SUPPORTED = {False: (3, 4, 5), True: (3, 4)}


def code_bits(size: int, directed: bool) -> int:
    return size * (size - 1) if directed else size * (size - 1) // 2


def pair_bit(i: int, j: int, directed: bool) -> int:
    """Bit holding edge ``i -> j`` (``{i, j}`` when undirected)."""
    if not directed:
        a, b = min(i, j), max(i, j)
        return b * (b - 1) // 2 + a
    if i < j:
        return j * (j - 1) + 2 * i + 1
    return i * (i - 1) + 2 * j


def _bit_pairs(size: int, directed: bool) -> list[tuple[int, int, int]]:
    out = []
    for j in range(size):
        for i in range(j):
            out.append((i, j, pair_bit(i, j, directed)))
            if directed:
                out.append((j, i, pair_bit(j, i, directed)))
    return sorted(out, key=lambda t: t[2])


def encode(size: int, edges, directed: bool) -> int:
    code = 0
    for i, j in edges:
        code |= 1 << pair_bit(i, j, directed)
    return code


def decode(code: int, size: int, directed: bool) -> list[tuple[int, int]]:
    return [(i, j) for i, j, b in _bit_pairs(size, directed) if code >> b & 1]


def string_key(code, nbits: int):
    """Integer whose numeric order is the lexicographic order of the bit-string."""
    out = code * 0
    for b in range(nbits):
        out = out | (((code >> b) & 1) << (nbits - 1 - b))
    return out


def permute_code(code, perm, directed: bool):
    """Relabel position ``i`` as ``perm[i]``. Works on ints and int arrays."""
    size = len(perm)
    out = code * 0
    for i, j, b in _bit_pairs(size, directed):
        out = out | (((code >> b) & 1) << pair_bit(perm[i], perm[j], directed))
    return out


def is_connected(code: int, size: int, directed: bool) -> bool:
    """Weak connectivity of the graph encoded by ``code``."""
    adj = [set() for _ in range(size)]
    for i, j in decode(code, size, directed):
        adj[i].add(j)
        adj[j].add(i)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == size


@dataclass(frozen=True, eq=False)
class GraphletAtlas:
    directed: bool
    max_size: int
    graphlet_size: np.ndarray  # (G,)
    graphlet_code: np.ndarray  # (G,) canonical codes
    orbit_of_position: tuple  # per graphlet: tuple of orbit ids, one per canonical position
    orbit_graphlet: np.ndarray  # (m,) graphlet owning each orbit
    orbit_multiplicity: np.ndarray  # (m,) number of canonical positions in the orbit
    # packed lookup for the counting kernel; row = table_offset[size] + code
    orbit_table: np.ndarray  # (rows, max_size) int32, -1 for disconnected codes
    graphlet_table: np.ndarray  # (rows,) int32, -1 for disconnected codes
    table_offset: np.ndarray  # (max_size + 1,)

    @property
    def orbit_count(self) -> int:
        return len(self.orbit_graphlet)

    @property
    def graphlet_count(self) -> int:
        return len(self.graphlet_code)

    @property
    def orbit_size(self) -> np.ndarray:
        """Graphlet size of each orbit."""
        return self.graphlet_size[self.orbit_graphlet]

    def orbit_ids_up_to(self, size: int) -> np.ndarray:
        return np.flatnonzero(self.orbit_size <= size)

    def orbit_ids_of_size(self, size: int) -> np.ndarray:
        return np.flatnonzero(self.orbit_size == size)

    def graphlet_orbits(self, gid: int) -> np.ndarray:
        return np.flatnonzero(self.orbit_graphlet == gid)

    def classify(self, code: int, size: int) -> tuple[int, tuple[int, ...]]:
        """Return ``(graphlet id, orbit id of each input position)`` for a labeled code."""
        if not 2 <= size <= self.max_size:
            raise DomainError(f"subgraph size {size} outside [2, {self.max_size}]")
        if not 0 <= code < 1 << code_bits(size, self.directed):
            raise DomainError(f"code {code} out of range for size {size}")
        row = self.table_offset[size] + code
        gid = int(self.graphlet_table[row])
        if gid < 0:
            raise DomainError(f"code {code:#x} (size {size}) is not connected")
        return gid, tuple(int(o) for o in self.orbit_table[row, :size])

    def dump(self, stream, remap: dict | None = None) -> None:
        """Write the atlas as TSV: graphlet id, size, canonical code (hex), orbit ids."""
        stream.write("graphlet_id\tsize\tcanonical_code\torbit_ids\n")
        for gid in range(self.graphlet_count):
            orbits = self.orbit_of_position[gid]
            if remap is not None:
                orbits = [remap.get(o, o) for o in orbits]
            stream.write(f"{gid}\t{self.graphlet_size[gid]}\t{int(self.graphlet_code[gid]):#x}\t"
                         f"{','.join(map(str, orbits))}\n")


def _orbit_partition(canon: int, size: int, directed: bool, perms) -> list[list[int]]:
    parent = list(range(size))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for perm in perms:
        if permute_code(canon, perm, directed) == canon:
            for i in range(size):
                a, b = find(i), find(perm[i])
                if a != b:
                    parent[max(a, b)] = min(a, b)
    classes: dict[int, list[int]] = {}
    for i in range(size):
        classes.setdefault(find(i), []).append(i)
    return sorted(classes.values(), key=min)


@functools.lru_cache(maxsize=None)
def build_atlas(directed: bool, max_size: int) -> GraphletAtlas:
    directed = bool(directed)
    if directed and max_size == 5:
        raise CapabilityError(
            f"directed graphlets of size 5 ({DIRECTED_SIZE5_ORBITS} orbits) are not supported")
    if max_size not in SUPPORTED[directed]:
        raise CapabilityError(
            f"unsupported graphlet size {max_size} for {'directed' if directed else 'undirected'} graphs")

    sizes, codes_out, orbit_pos = [], [], []
    orbit_graphlet, orbit_mult = [], []
    offsets = np.zeros(max_size + 1, dtype=np.int64)
    tables, gtables = [], []
    rows = 0
    next_orbit = 0
    for s in range(2, max_size + 1):
        offsets[s] = rows
        nbits = code_bits(s, directed)
        codes = np.arange(1 << nbits, dtype=np.int64)
        perms = list(itertools.permutations(range(s)))
        permuted = np.stack([permute_code(codes, p, directed) for p in perms])
        keys = string_key(permuted, nbits)
        which = keys.argmin(axis=0)
        canon = permuted[which, np.arange(len(codes))]

        gid_of_canon = {}
        orbit_rows = []
        for c in sorted(set(canon.tolist()), key=lambda c: string_key(c, nbits)):
            if not is_connected(c, s, directed):
                continue
            gid = len(codes_out)
            gid_of_canon[c] = gid
            classes = _orbit_partition(c, s, directed, perms)
            pos = [0] * s
            for cls in classes:
                for i in cls:
                    pos[i] = next_orbit
                orbit_graphlet.append(gid)
                orbit_mult.append(len(cls))
                next_orbit += 1
            sizes.append(s)
            codes_out.append(c)
            orbit_pos.append(tuple(pos))
            orbit_rows.append(pos)

        table = np.full((1 << nbits, max_size), -1, dtype=np.int32)
        gtable = np.full(1 << nbits, -1, dtype=np.int32)
        perm_arr = np.array(perms, dtype=np.int64)
        for x in range(1 << nbits):
            gid = gid_of_canon.get(int(canon[x]))
            if gid is None:
                continue
            p = perm_arr[which[x]]
            gtable[x] = gid
            table[x, :s] = [orbit_pos[gid][p[i]] for i in range(s)]
        tables.append(table)
        gtables.append(gtable)
        rows += 1 << nbits

    full_table = np.zeros((offsets[2], max_size), dtype=np.int32) - 1
    full_g = np.zeros(offsets[2], dtype=np.int32) - 1
    orbit_table = np.concatenate([full_table] + tables)
    graphlet_table = np.concatenate([full_g] + gtables)
    return GraphletAtlas(
        directed=directed,
        max_size=max_size,
        graphlet_size=np.array(sizes, dtype=np.int64),
        graphlet_code=np.array(codes_out, dtype=np.int64),
        orbit_of_position=tuple(orbit_pos),
        orbit_graphlet=np.array(orbit_graphlet, dtype=np.int64),
        orbit_multiplicity=np.array(orbit_mult, dtype=np.int64),
        orbit_table=orbit_table,
        graphlet_table=graphlet_table,
        table_offset=offsets,
    )


def read_orbit_remap(stream) -> dict[int, str]:
    """Two whitespace-separated columns: internal orbit id, external id."""
    remap = {}
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DomainError(f"orbit remap line {lineno}: expected 2 columns")
        remap[int(parts[0])] = parts[1]
    return remap
