"""Network comparison measures over graphlet degree matrices and pairwise distance matrices."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import rankdata

from .atlas import build_atlas
from .denoise import ica_reconstruct, pca_reconstruct, truncate_reconstruction
from .emd import DistributionPack, emd_star_columns, pack_columns
from .errors import DomainError, UsageError

MEASURES = ("netemd", "weighted", "gda", "gcd")


class PairError(DomainError):
    def __init__(self, message, pair):
        super().__init__(message)
        self.pair = pair


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    labels: tuple
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (len(self.labels), len(self.labels)):
            raise DomainError("distance matrix shape does not match labels")
        if not np.all(np.isfinite(v)):
            raise DomainError("distance matrix has non-finite entries")
        if np.abs(v - v.T).max(initial=0.0) > 1e-9 or np.any(np.diag(v) != 0):
            raise DomainError("distance matrix must be symmetric with zero diagonal")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.labels)

    def subset(self, idx) -> "DistanceMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return DistanceMatrix(tuple(self.labels[i] for i in idx), self.values[np.ix_(idx, idx)],
                              dict(self.provenance))

    def write(self, stream) -> None:
        for key in sorted(self.provenance):
            stream.write(f"# {key}={json.dumps(self.provenance[key], sort_keys=True)}\n")
        stream.write("label\t" + "\t".join(map(str, self.labels)) + "\n")
        for lab, row in zip(self.labels, self.values):
            stream.write(str(lab) + "\t" + "\t".join(repr(float(x)) for x in row) + "\n")

    @classmethod
    def read(cls, stream) -> "DistanceMatrix":
        prov, labels, rows = {}, None, []
        for line in stream:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                prov[key] = json.loads(val) if val else None
                continue
            parts = line.split("\t")
            if labels is None:
                labels = tuple(parts[1:])
            else:
                rows.append([float(x) for x in parts[1:]])
        if labels is None:
            raise DomainError("distance matrix file has no header")
        return cls(labels, np.array(rows, dtype=np.float64).reshape(len(labels), len(labels)), prov)


@dataclass(frozen=True, eq=False)
class GraphletCorrelationMatrix:
    orbit_ids: np.ndarray
    values: np.ndarray


# ------------------------------------------------------------------ helpers

def _check_compatible(a, b) -> None:
    if a.directed != b.directed:
        raise DomainError("cannot compare a directed with an undirected matrix")
    if not np.array_equal(np.asarray(a.orbit_ids), np.asarray(b.orbit_ids)):
        raise DomainError("matrices are built on different orbit sets")


def _subset_positions(gdm, orbit_subset) -> np.ndarray:
    ids = np.asarray(gdm.orbit_ids)
    if orbit_subset is None:
        return np.arange(len(ids), dtype=np.int64)
    lookup = {int(o): i for i, o in enumerate(ids)}
    try:
        return np.array([lookup[int(o)] for o in orbit_subset], dtype=np.int64)
    except KeyError as exc:
        raise DomainError(f"unknown orbit id {exc.args[0]} in subset") from None


def _pack(gdm) -> DistributionPack:
    cached = getattr(gdm, "_pack", None)
    if cached is None:
        cached = pack_columns(gdm.values, gdm.orbit_ids)
        try:
            object.__setattr__(gdm, "_pack", cached)
        except (AttributeError, TypeError):
            pass
    return cached


def _emd_terms(pa: DistributionPack, pb: DistributionPack, cols: np.ndarray) -> np.ndarray:
    return emd_star_columns(pa.support, pa.weights, pa.offsets, pb.support, pb.weights, pb.offsets,
                            cols, cols)


# ----------------------------------------------------------------- measures

def netemd(gdm_g, gdm_h, orbit_subset=None) -> float:
    """Mean EMD* between the orbit distributions of two networks.

    Raw and reconstructed matrices are both accepted; restricting
    ``orbit_subset`` to the size-3 orbits gives the TriadEMD variant.
    """
    _check_compatible(gdm_g, gdm_h)
    cols = _subset_positions(gdm_g, orbit_subset)
    if len(cols) == 0:
        raise DomainError("empty orbit set")
    return float(_emd_terms(_pack(gdm_g), _pack(gdm_h), cols).mean())


def weighted_netemd(gdm_g, gdm_h, orbit_subset=None) -> float:
    """NetEmd averaged only over orbits that occur in at least one of the two networks."""
    _check_compatible(gdm_g, gdm_h)
    cols = _subset_positions(gdm_g, orbit_subset)
    pa, pb = _pack(gdm_g), _pack(gdm_h)
    cols = cols[pa.occupied[cols] | pb.occupied[cols]]
    if len(cols) == 0:
        raise DomainError("no orbit occurs in either network")
    return float(_emd_terms(pa, pb, cols).mean())


def _scaled_gdd(column: np.ndarray) -> dict[int, float]:
    vals, counts = np.unique(column[column > 0], return_counts=True)
    if len(vals) == 0:
        return {}
    scaled = counts / vals
    scaled = scaled / scaled.sum()
    return dict(zip(vals.tolist(), scaled.tolist()))


def gda_terms(gdm_g, gdm_h) -> tuple[np.ndarray, np.ndarray]:
    """Per-orbit agreements and the mask of orbits that enter the mean."""
    _check_compatible(gdm_g, gdm_h)
    if not _is_integral(gdm_g) or not _is_integral(gdm_h):
        raise UsageError("GDA needs raw orbit counts, not a denoised reconstruction")
    atlas = build_atlas(gdm_g.directed, gdm_g.max_size)
    ids = np.asarray(gdm_g.orbit_ids)
    graphlet = atlas.orbit_graphlet[ids]
    fg, fh = np.asarray(gdm_g.values), np.asarray(gdm_h.values)
    present = np.zeros(atlas.graphlet_count, dtype=bool)
    for f in (fg, fh):
        nz = np.any(f != 0, axis=0)
        present[np.unique(graphlet[nz])] = True
    include = present[graphlet]
    agree = np.ones(len(ids))
    for j in np.flatnonzero(include):
        ng, nh = _scaled_gdd(fg[:, j]), _scaled_gdd(fh[:, j])
        keys = set(ng) | set(nh)
        sq = sum((ng.get(k, 0.0) - nh.get(k, 0.0)) ** 2 for k in keys)
        agree[j] = 1.0 - math.sqrt(sq)
    return agree, include


def gda(gdm_g, gdm_h) -> float:
    """Graphlet degree distribution agreement in [0, 1]; 1 means identical."""
    agree, include = gda_terms(gdm_g, gdm_h)
    if not include.any():
        raise DomainError("no graphlet occurs in either network")
    return float(agree[include].mean())


def _is_integral(gdm) -> bool:
    v = np.asarray(gdm.values)
    return np.issubdtype(v.dtype, np.integer) or bool(np.all(v == np.round(v)))


def gcm(gdm, orbit_subset=None) -> GraphletCorrelationMatrix:
    """Spearman correlations between orbit columns; constant columns correlate 0 with everything."""
    cols = _subset_positions(gdm, orbit_subset)
    if len(cols) < 2:
        raise DomainError("graphlet correlation needs at least two orbits")
    x = np.asarray(gdm.values, dtype=np.float64)[:, cols]
    ranks = rankdata(x, axis=0, method="average")
    ranks = ranks - ranks.mean(axis=0)
    norm = np.sqrt((ranks ** 2).sum(axis=0))
    const = norm == 0
    ranks[:, ~const] /= norm[~const]
    corr = ranks.T @ ranks
    corr[const, :] = 0.0
    corr[:, const] = 0.0
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return GraphletCorrelationMatrix(np.asarray(gdm.orbit_ids)[cols], corr)


def gcd(gdm_g, gdm_h, orbit_subset=None) -> float:
    """Euclidean distance between the strict upper triangles of the two GCMs."""
    _check_compatible(gdm_g, gdm_h)
    a = _gcm_cached(gdm_g, orbit_subset)
    b = _gcm_cached(gdm_h, orbit_subset)
    iu = np.triu_indices(a.shape[0], k=1)
    return float(np.linalg.norm(a[iu] - b[iu]))


def _gcm_cached(gdm, orbit_subset):
    key = None if orbit_subset is None else tuple(int(o) for o in orbit_subset)
    cache = getattr(gdm, "_gcm", None)
    if cache is None:
        cache = {}
        try:
            object.__setattr__(gdm, "_gcm", cache)
        except (AttributeError, TypeError):
            pass
    if key not in cache:
        cache[key] = gcm(gdm, orbit_subset).values
    return cache[key]


# ------------------------------------------------------------ preprocessing

def parse_denoise(spec: str | None) -> tuple[str, float | int | None]:
    """``none``, ``pca:<r>`` or ``ica:<c>``."""
    if spec is None or spec == "none":
        return "none", None
    method, _, arg = spec.partition(":")
    try:
        if method == "pca":
            return "pca", float(arg)
        if method == "ica":
            return "ica", int(arg)
    except ValueError:
        pass
    raise UsageError(f"bad denoise spec {spec!r}; expected none, pca:<r> or ica:<c>")


def prepare(gdm, denoise: str | None = None, truncate_to: int | None = None, seed: int = 0,
            max_iter: int = 1000):
    """Denoise (optional), then keep only orbits of graphlets up to ``truncate_to`` nodes."""
    method, arg = parse_denoise(denoise)
    out = gdm
    if method == "pca":
        out = pca_reconstruct(gdm, r=arg)
    elif method == "ica":
        out = ica_reconstruct(gdm, arg, max_iter=max_iter, seed=seed)
    if truncate_to is not None:
        atlas = build_atlas(gdm.directed, gdm.max_size)
        keep = [o for o in np.asarray(out.orbit_ids) if atlas.orbit_size[o] <= truncate_to]
        if method == "none":
            out = out.select(keep)
        else:
            out = truncate_reconstruction(out, keep)
    return out


# ----------------------------------------------------------------- pairwise

def _measure_fn(measure, orbit_subset) -> Callable:
    if callable(measure):
        return measure
    if measure == "netemd":
        return lambda a, b: netemd(a, b, orbit_subset)
    if measure == "weighted":
        return lambda a, b: weighted_netemd(a, b, orbit_subset)
    if measure == "gda":
        return lambda a, b: 1.0 - gda(a, b)
    if measure == "gcd":
        return lambda a, b: gcd(a, b, orbit_subset)
    raise UsageError(f"unknown measure {measure!r}; choose from {', '.join(MEASURES)}")


def pairwise_matrix(corpus: Sequence, measure="netemd", orbit_subset=None, labels=None,
                    workers: int = 1, provenance: dict | None = None) -> DistanceMatrix:
    """Evaluate ``measure`` once per unordered pair. GDA enters as ``1 - agreement``."""
    fn = _measure_fn(measure, orbit_subset)
    n = len(corpus)
    if labels is None:
        labels = [getattr(g, "name", "") or str(i) for i, g in enumerate(corpus)]
    if not callable(measure):
        for g in corpus[1:]:
            _check_compatible(corpus[0], g)
    if not callable(measure) and measure in ("netemd", "weighted"):
        for g in corpus:
            _pack(g)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    out = np.zeros((n, n))

    def run(chunk):
        res = []
        for i, j in chunk:
            try:
                res.append(fn(corpus[i], corpus[j]))
            except Exception as exc:
                raise PairError(f"pair ({labels[i]}, {labels[j]}): {exc}", (i, j)) from exc
        return res

    workers = max(1, int(workers))
    if workers == 1 or len(pairs) < 2:
        values = run(pairs)
    else:
        size = max(1, math.ceil(len(pairs) / (4 * workers)))
        chunks = [pairs[s:s + size] for s in range(0, len(pairs), size)]
        with ThreadPoolExecutor(workers) as pool:
            values = [v for part in pool.map(run, chunks) for v in part]
    for (i, j), v in zip(pairs, values):
        out[i, j] = out[j, i] = v
    prov = {"measure": measure if isinstance(measure, str) else getattr(measure, "__name__", "custom")}
    if orbit_subset is not None:
        prov["orbit_subset"] = [int(o) for o in orbit_subset]
    if provenance:
        prov.update(provenance)
    return DistanceMatrix(tuple(labels), out, prov)
