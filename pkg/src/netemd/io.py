"""File formats: graphlet degree matrices, manifests, label files and orbit subsets."""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .atlas import build_atlas
from .counting import GraphletDegreeMatrix
from .denoise import ReconstructedGDM
from .errors import DomainError, ParseError


def _fmt(x) -> str:
    return repr(float(x))


def write_gdm(gdm, stream) -> None:
    """TSV with ``# key=value`` header lines, a ``node orbit_<id> ...`` row, one row per node."""
    stream.write(f"# directed={str(bool(gdm.directed)).lower()} max_size={int(gdm.max_size)}\n")
    prov = getattr(gdm, "provenance", None)
    if prov is not None:
        stream.write(f"# provenance={json.dumps(prov, sort_keys=True)}\n")
    ids = np.asarray(gdm.orbit_ids)
    stream.write("node\t" + "\t".join(f"orbit_{int(o)}" for o in ids) + "\n")
    values = np.asarray(gdm.values)
    integral = np.issubdtype(values.dtype, np.integer)
    for i, row in enumerate(values):
        cells = map(str, row.tolist()) if integral else map(_fmt, row)
        stream.write(f"{i}\t" + "\t".join(cells) + "\n")


def read_gdm(stream, name: str = ""):
    meta, prov, header, rows = {}, None, None, []
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("provenance="):
                prov = json.loads(body[len("provenance="):])
            else:
                for token in body.split():
                    key, _, val = token.partition("=")
                    meta[key] = val
            continue
        parts = line.split("\t")
        if header is None:
            if parts[0] != "node" or not all(p.startswith("orbit_") for p in parts[1:]):
                raise ParseError("expected a 'node orbit_<id> ...' header", lineno)
            header = [int(p[len("orbit_"):]) for p in parts[1:]]
            continue
        if len(parts) != len(header) + 1:
            raise ParseError(f"expected {len(header) + 1} columns, got {len(parts)}", lineno)
        rows.append(parts[1:])
    if header is None or "directed" not in meta or "max_size" not in meta:
        raise ParseError("missing GDM header lines")
    directed = meta["directed"] == "true"
    max_size = int(meta["max_size"])
    ids = np.array(header, dtype=np.int64)
    try:
        if prov is None:
            values = np.array(rows, dtype=np.int64).reshape(len(rows), len(ids))
            return GraphletDegreeMatrix(values, directed, max_size, ids, name)
        values = np.array(rows, dtype=np.float64).reshape(len(rows), len(ids))
    except ValueError as exc:
        raise ParseError(f"bad matrix entry: {exc}") from None
    return ReconstructedGDM(values, directed, max_size, ids, prov, name)


def save_gdm(gdm, path) -> None:
    _atomic_write(path, lambda f: write_gdm(gdm, f))


def load_gdm(path):
    with open(path) as f:
        return read_gdm(f, name=Path(path).name.split(".")[0])


def _atomic_write(path, writer) -> None:
    """Write to a sibling temp file, then rename, so interrupted runs leave no partial output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".part")
    with open(tmp, "w") as f:
        writer(f)
    os.replace(tmp, path)


def save_text(path, text: str) -> None:
    _atomic_write(path, lambda f: f.write(text))


# ------------------------------------------------------------------ manifests

def write_manifest(path, rows) -> None:
    save_text(path, "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


def read_manifest(path) -> list[dict]:
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if line.strip():
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{path}: {exc.msg}", lineno) from None
    return rows


def read_labels(path) -> dict[str, str]:
    """Two whitespace-separated columns: network label, category."""
    out = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected 'label category'", lineno)
            out[parts[0]] = parts[1]
    return out


# -------------------------------------------------------------- orbit subsets

def named_orbit_subset(name: str, directed: bool, max_size: int):
    """``all``, ``size3-only`` (orbits of 3-node graphlets) or ``upto<S>``; None if unknown."""
    atlas = build_atlas(directed, max_size)
    if name == "all":
        return np.arange(atlas.orbit_count)
    if name == "size3-only":
        return atlas.orbit_ids_of_size(3)
    if name.startswith("upto") and name[4:].isdigit():
        s = int(name[4:])
        if not 2 <= s <= max_size:
            raise DomainError(f"subset {name!r} outside sizes 2..{max_size}")
        return atlas.orbit_ids_up_to(s)
    return None


def read_orbit_subset(spec: str, directed: bool, max_size: int) -> np.ndarray:
    """A named subset or a file of orbit ids (whitespace separated, ``#`` comments)."""
    named = named_orbit_subset(spec, directed, max_size)
    if named is not None:
        return named
    ids = []
    with open(spec) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split("#", 1)[0]
            for tok in line.split():
                try:
                    ids.append(int(tok))
                except ValueError:
                    raise ParseError(f"bad orbit id {tok!r}", lineno) from None
    if len(set(ids)) != len(ids):
        raise DomainError("orbit subset lists an id twice")
    return np.array(ids, dtype=np.int64)
