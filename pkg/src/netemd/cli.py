"""``netemd`` command line: generate, count, compare, evaluate, experiment, atlas."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io as nio
from .atlas import build_atlas, read_orbit_remap
from .counting import count_orbits
from .distances import DistanceMatrix, pairwise_matrix, prepare, parse_denoise
from .errors import CapabilityError, DomainError, NetEmdError, UsageError
from .evaluation import METRICS, LabeledDataset, mean_and_se
from .generators import MODELS, ModelSpec, generate_detailed, inject_reciprocity
from .graph import read_graph, reciprocity, save_graph

log = logging.getLogger("netemd")


@dataclass
class RunConfig:
    """Parameters of one command; echoed into the provenance of what it writes.

    The worker count is left out of the echo because outputs must not depend on it.
    """

    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    workers: int = 0

    def provenance(self) -> dict:
        keys = _ECHOED.get(self.command, ())
        params = {k: self.params.get(k, _DEFAULTS.get(k)) for k in keys}
        return {"command": self.command, "params": params, "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            raw = json.loads(text)
            return cls(**raw)
        except (json.JSONDecodeError, TypeError) as exc:
            raise UsageError(f"bad run config: {exc}") from None


# parameters that shape the output; paths and worker counts are left out so
# that relocated or re-parallelised runs produce identical bytes
_ECHOED = {
    "generate": ("models", "sizes", "degrees", "reps", "rho"),
    "count": ("size", "directed"),
    "compare": ("measure", "denoise", "orbit_subset", "truncate_to"),
    "evaluate": ("metric", "group_by"),
}
_DEFAULTS = {"measure": "netemd", "denoise": "none", "size": 4, "directed": False,
             "metric": ["pbar"], "group_by": [], "reps": 1}


def _workers(n: int) -> int:
    return n if n and n > 0 else (os.cpu_count() or 1)


def _spec_seed(base: int, model: str, n: int, k: float, rep: int) -> int:
    """Stable per-network seed derived from the run seed and the grid coordinates."""
    key = [int(base), MODELS.index(model), int(n), int(round(float(k) * 1000)), int(rep)]
    return int(np.random.SeedSequence(key).generate_state(1, dtype=np.uint32)[0])


def _fmt_num(x) -> str:
    return ("%g" % x).replace(".", "p")


# ------------------------------------------------------------------ generate

def run_generate(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    out = Path(p["out"])
    models = p.get("models") or list(MODELS)
    unknown = [m for m in models if m not in MODELS]
    if unknown:
        raise UsageError(f"unknown model {unknown[0]!r}")
    rhos = p.get("rho")
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for model in models:
        for n in p["sizes"]:
            for k in p["degrees"]:
                for rep in range(int(p.get("reps", 1))):
                    seed = _spec_seed(cfg.seed, model, n, k, rep)
                    g, info = generate_detailed(ModelSpec(model, int(n), float(k), seed))
                    stem = f"{model}_N{n}_k{_fmt_num(k)}_r{rep}"
                    if rhos is None:
                        path = out / f"{stem}.edges"
                        save_graph(g, path)
                        rows.append(_manifest_row(path, model, n, k, None, seed, g))
                        continue
                    sched = inject_reciprocity(g, rhos, seed=seed)
                    for rho in sched.levels:
                        d = sched.graph_at(rho)
                        path = out / f"{stem}_rho{_fmt_num(rho)}.edges"
                        save_graph(d, path)
                        rows.append(_manifest_row(path, model, n, k, rho, seed, d))
    nio.write_manifest(out / "manifest.jsonl", rows)
    return rows


def _manifest_row(path, model, n, k, rho, seed, g) -> dict:
    return {
        "path": path.name, "model": model, "N": int(n), "k": float(k),
        "rho": None if rho is None else float(rho), "seed": int(seed),
        "measured_degree": g.average_degree(),
        "measured_reciprocity": reciprocity(g) if g.directed else None,
    }


# --------------------------------------------------------------------- count

def _inputs(p) -> list[tuple[Path, dict]]:
    if p.get("manifest"):
        base = Path(p["manifest"]).parent
        return [(base / row["path"], row) for row in nio.read_manifest(p["manifest"])]
    return [(Path(f), {}) for f in p.get("inputs", [])]


def run_count(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    size = int(p.get("size", 4))
    out = Path(p["out"])
    rows = []
    atlases = {}
    for path, row in _inputs(p):
        directed = bool(p.get("directed")) or row.get("rho") is not None
        if directed not in atlases:
            atlases[directed] = build_atlas(directed, size)
        target = out / (path.name.split(".")[0] + ".gdm.tsv")
        if target.exists() and not p.get("force"):
            log.info("skip %s (exists)", target)
        else:
            try:
                g = read_graph(path, directed=directed)
            except OSError as exc:
                raise DomainError(f"{path}: {exc.strerror}") from None
            gdm = count_orbits(g, atlases[directed], workers=_workers(cfg.workers), name=target.stem)
            nio.save_gdm(gdm, target)
        rows.append({**row, "gdm": target.name, "source": str(path.name)})
    nio.write_manifest(out / "gdms.jsonl", rows)
    return rows


# ------------------------------------------------------------------- compare

def _load_corpus(p):
    if p.get("manifest"):
        base = Path(p["manifest"]).parent
        rows = nio.read_manifest(p["manifest"])
        paths = [base / r.get("gdm", r.get("path")) for r in rows]
    else:
        paths = [Path(f) for f in p.get("inputs", [])]
    if not paths:
        raise UsageError("no input matrices")
    corpus = []
    for path in paths:
        try:
            corpus.append(nio.load_gdm(path))
        except OSError as exc:
            raise DomainError(f"{path}: {exc.strerror}") from None
    return corpus, [path.name.split(".")[0] for path in paths]


def run_compare(cfg: RunConfig) -> DistanceMatrix:
    p = cfg.params
    measure = p.get("measure", "netemd")
    denoise = p.get("denoise", "none")
    method, _ = parse_denoise(denoise)
    if method != "none" and measure in ("gda", "gcd"):
        raise UsageError(f"--denoise {denoise} cannot be combined with --measure {measure}")
    corpus, labels = _load_corpus(p)
    first = corpus[0]
    truncate = p.get("truncate_to")
    if truncate is not None and method == "none" and measure == "gda":
        raise UsageError("--truncate-to applies to NetEmd and GCD measures")
    if method != "none" or truncate is not None:
        corpus = [prepare(g, denoise, truncate_to=truncate, seed=cfg.seed) for g in corpus]
    subset = None
    if p.get("orbit_subset"):
        subset = nio.read_orbit_subset(p["orbit_subset"], first.directed, first.max_size)
        if truncate is not None:
            keep = set(int(o) for o in corpus[0].orbit_ids)
            subset = np.array([o for o in subset if int(o) in keep], dtype=np.int64)
    dm = pairwise_matrix(corpus, measure, orbit_subset=subset, labels=labels,
                         workers=_workers(cfg.workers), provenance={"config": cfg.provenance()})
    if p.get("out"):
        nio.save_text(p["out"], _dm_text(dm))
    return dm


def _dm_text(dm) -> str:
    import io as _io
    buf = _io.StringIO()
    dm.write(buf)
    return buf.getvalue()


# ------------------------------------------------------------------ evaluate

def run_evaluate(cfg: RunConfig) -> dict:
    p = cfg.params
    with open(p["matrix"]) as f:
        dm = DistanceMatrix.read(f)
    metrics = p.get("metric") or ["pbar"]
    if isinstance(metrics, str):
        metrics = p["metric"] = [metrics]
    bad = [m for m in metrics if m not in METRICS]
    if bad:
        raise UsageError(f"unknown metric {bad[0]!r}; choose from {', '.join(METRICS)}")
    category, groups = _labels_for(dm.labels, p)
    ds = LabeledDataset(dm.values, category, groups)
    keys = p.get("group_by") or []
    parts = ds.split(keys)
    report = {"config": cfg.provenance(), "networks": len(dm.labels), "metrics": {}}
    for name in metrics:
        fn = METRICS[name]
        per = {"/".join(f"{k}={v}" for k, v in zip(keys, key)) or "all": fn(sub) for key, sub in parts.items()}
        entry = {"groups": per}
        if len(per) >= 2:
            entry["mean"], entry["se"] = mean_and_se(list(per.values()))
        else:
            entry["mean"], entry["se"] = next(iter(per.values())), 0.0
        report["metrics"][name] = entry
    if p.get("out"):
        nio.save_text(p["out"], json.dumps(report, sort_keys=True, indent=2) + "\n")
    return report


def _labels_for(labels, p):
    if p.get("labels"):
        table = nio.read_labels(p["labels"])
        missing = [lab for lab in labels if lab not in table]
        if missing:
            raise DomainError(f"no label for network {missing[0]!r}")
        return [table[lab] for lab in labels], {}
    if not p.get("manifest"):
        raise UsageError("evaluate needs --labels or --manifest")
    rows = {}
    for r in nio.read_manifest(p["manifest"]):
        key = Path(r.get("gdm", r["path"])).name.split(".")[0]
        rows[key] = r
    missing = [lab for lab in labels if lab not in rows]
    if missing:
        raise DomainError(f"no manifest row for network {missing[0]!r}")
    groups = {key: [rows[lab].get(key) for lab in labels] for key in ("N", "k", "rho")}
    return [rows[lab]["model"] for lab in labels], groups


# ---------------------------------------------------------------- experiment

def run_experiment(spec: dict, seed: int = 0, workers: int = 0) -> dict:
    """generate -> count -> compare -> evaluate inside ``spec["out"]``."""
    out = Path(spec["out"])
    seed = int(spec.get("seed", seed))
    gen = dict(spec["generate"], out=str(out / "graphs"))
    run_generate(RunConfig("generate", gen, seed, workers))
    cnt = dict(spec.get("count", {}), manifest=str(out / "graphs" / "manifest.jsonl"), out=str(out / "gdm"))
    run_count(RunConfig("count", cnt, seed, workers))
    results = {}
    for i, cmp in enumerate(spec.get("compare", [{"measure": "netemd"}])):
        tag = cmp.get("name", f"compare{i}")
        cmp = {k: v for k, v in cmp.items() if k != "name"}
        cmp.update(manifest=str(out / "gdm" / "gdms.jsonl"), out=str(out / f"{tag}.dist.tsv"))
        run_compare(RunConfig("compare", cmp, seed, workers))
        ev = dict(spec.get("evaluate", {}), matrix=cmp["out"], manifest=cmp["manifest"],
                  out=str(out / f"{tag}.metrics.json"))
        results[tag] = run_evaluate(RunConfig("evaluate", ev, seed, workers))
    return results


# ---------------------------------------------------------------------- main

def _split_list(text, cast=str):
    return [cast(x) for x in text.split(",") if x != ""]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netemd", description="Graphlet-based network comparison.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=0, help="threads; 0 = all cores")

    g = sub.add_parser("generate", help="synthesize a corpus of random graphs")
    g.add_argument("--models", type=lambda s: _split_list(s), default=list(MODELS))
    g.add_argument("--sizes", type=lambda s: _split_list(s, int), required=True)
    g.add_argument("--degrees", type=lambda s: _split_list(s, float), required=True)
    g.add_argument("--reps", type=int, default=1)
    g.add_argument("--rho", type=lambda s: _split_list(s, float), default=None,
                   help="reciprocity levels; produces directed graphs")
    g.add_argument("--out", required=True)
    common(g)

    c = sub.add_parser("count", help="graphlet degree matrices")
    c.add_argument("inputs", nargs="*")
    c.add_argument("--manifest")
    c.add_argument("--directed", action="store_true")
    c.add_argument("--size", type=int, default=4)
    c.add_argument("--out", required=True)
    c.add_argument("--force", action="store_true")
    common(c)

    m = sub.add_parser("compare", help="pairwise distance matrix")
    m.add_argument("inputs", nargs="*")
    m.add_argument("--manifest")
    m.add_argument("--measure", choices=["netemd", "weighted", "gda", "gcd"], default="netemd")
    m.add_argument("--denoise", default="none", help="none | pca:<r> | ica:<c>")
    m.add_argument("--orbit-subset", help="file of orbit ids, or all / size3-only / upto<S>")
    m.add_argument("--truncate-to", type=int)
    m.add_argument("--out", required=True)
    common(m)

    e = sub.add_parser("evaluate", help="score a distance matrix")
    e.add_argument("matrix")
    e.add_argument("--labels")
    e.add_argument("--manifest")
    e.add_argument("--metric", type=lambda s: _split_list(s), default=["pbar"])
    e.add_argument("--group-by", type=lambda s: _split_list(s), default=[])
    e.add_argument("--out")
    common(e)

    x = sub.add_parser("experiment", help="run a JSON recipe end to end")
    x.add_argument("config")
    common(x)

    a = sub.add_parser("atlas", help="dump the graphlet atlas")
    a.add_argument("--directed", action="store_true")
    a.add_argument("--size", type=int, default=4)
    a.add_argument("--remap", help="two-column file mapping internal orbit ids to external ones")
    a.add_argument("--out")
    return ap


def _params(args, skip=("command", "verbose", "seed", "workers")) -> dict:
    return {k: v for k, v in vars(args).items() if k not in skip}


def dispatch(args) -> int:
    seed, workers = getattr(args, "seed", 0), getattr(args, "workers", 0)
    if args.command == "generate":
        rows = run_generate(RunConfig("generate", _params(args), seed, workers))
        print(f"wrote {len(rows)} graphs to {args.out}")
    elif args.command == "count":
        if not args.inputs and not args.manifest:
            raise UsageError("count needs input files or --manifest")
        rows = run_count(RunConfig("count", _params(args), seed, workers))
        print(f"{len(rows)} matrices in {args.out}")
    elif args.command == "compare":
        if not args.inputs and not args.manifest:
            raise UsageError("compare needs input files or --manifest")
        dm = run_compare(RunConfig("compare", _params(args), seed, workers))
        print(f"{len(dm.labels)}x{len(dm.labels)} matrix written to {args.out}")
    elif args.command == "evaluate":
        report = run_evaluate(RunConfig("evaluate", _params(args), seed, workers))
        for name, entry in report["metrics"].items():
            print(f"{name}\t{entry['mean']:.6f}\t+/- {entry['se']:.6f}")
    elif args.command == "experiment":
        try:
            spec = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise DomainError(f"{args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.config}: {exc.msg}") from None
        results = run_experiment(spec, seed, workers)
        for tag, report in results.items():
            for name, entry in report["metrics"].items():
                print(f"{tag}\t{name}\t{entry['mean']:.6f}\t+/- {entry['se']:.6f}")
    elif args.command == "atlas":
        atlas = build_atlas(args.directed, args.size)
        remap = None
        if args.remap:
            with open(args.remap) as f:
                remap = read_orbit_remap(f)
        if args.out:
            with open(args.out, "w") as f:
                atlas.dump(f, remap)
        else:
            atlas.dump(sys.stdout, remap)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return exc.exit_code
    except CapabilityError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return exc.exit_code
    except NetEmdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
