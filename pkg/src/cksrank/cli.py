"""Rank influential spreaders, run diffusion sweeps and compare methods.

Commands: ``rank``, ``experiment``, ``stats``, ``generate`` and ``summary``.
Settings come from an optional JSON config file (see README) and flags; a
flag always wins over the file.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 internal failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy

from . import __version__
from .baselines import METHODS, rank_method
from .cks import write_score_table
from .community import louvain
from .diffusion import RNG_NAME
from .errors import CksError, ContractViolation
from .experiments import (
    DEFAULT_FRACTION,
    DEFAULT_P,
    DEFAULT_REPLICATES,
    PROBABILITIES,
    result_matrix_rows,
    run_dataset,
    write_curves,
    write_timings,
)
from .graph import Graph, generate_ba, generate_powerlaw_cluster, graph_summary, read_edge_list, write_edge_list
from .stats import DEFAULT_ALPHA, ResultMatrix, friedman_report, read_result_matrix, report_from_ranks, write_report, write_result_matrix

log = logging.getLogger("cksrank")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3


class ConfigError(CksError, ValueError):
    pass


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    path: str | None = None
    directed: bool = False
    generator: str | None = None
    n: int | None = None
    m: int | None = None
    p: float | None = None
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> DatasetSpec:
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown dataset keys: {sorted(unknown)}")
        spec = cls(**d)
        if (spec.path is None) == (spec.generator is None):
            raise ConfigError(f"dataset {spec.name!r}: give exactly one of 'path' or 'generator'")
        if spec.generator is not None:
            if spec.generator.lower() not in ("ba", "pcg"):
                raise ConfigError(f"dataset {spec.name!r}: generator must be 'ba' or 'pcg'")
            if spec.n is None or spec.m is None:
                raise ConfigError(f"dataset {spec.name!r}: generator needs 'n' and 'm'")
            if spec.generator.lower() == "pcg" and spec.p is None:
                raise ConfigError(f"dataset {spec.name!r}: pcg needs 'p'")
        return spec

    def load(self) -> Graph:
        if self.path is not None:
            g = read_edge_list(self.path, directed_input=self.directed)
        elif self.generator.lower() == "ba":
            g = generate_ba(self.n, self.m, self.seed)
        else:
            g = generate_powerlaw_cluster(self.n, self.m, self.p, self.seed)
        return replace(g, name=self.name)


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetSpec, ...] = ()
    methods: tuple[str, ...] = METHODS
    fractions: tuple[float, ...] | None = None
    probabilities: tuple[float, ...] = PROBABILITIES
    probability_fraction: float = DEFAULT_FRACTION
    activation_probability: float = DEFAULT_P
    replicates: int = DEFAULT_REPLICATES
    master_seed: int = 0
    timing: bool = True
    timing_repeats: int = 3
    workers: int = 1
    out: str = "results"

    def validate(self) -> ExperimentConfig:
        if not self.datasets:
            raise ConfigError("no datasets configured")
        if not self.methods:
            raise ConfigError("no methods configured")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        probs = [self.activation_probability, self.probability_fraction, *self.probabilities]
        probs += list(self.fractions or ())
        if any(not 0.0 <= x <= 1.0 for x in probs):
            raise ConfigError("probabilities and fractions must lie in [0, 1]")
        return self

    def digest(self) -> str:
        """Hash of everything that affects results (not ``out``/``workers``)."""
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return raw


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    raw = load_config(args.config)
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    datasets = [DatasetSpec.from_dict(d) for d in raw.pop("datasets", [])]
    for path in getattr(args, "input", None) or []:
        datasets.append(DatasetSpec(name=Path(path).stem, path=path, directed=args.directed))
    if getattr(args, "generate", None):
        for g in args.generate:
            datasets.append(_parse_generator_flag(g))
    for key in ("fractions", "probabilities", "methods"):
        if raw.get(key) is not None:
            raw[key] = tuple(raw[key])
    overrides = {
        "master_seed": args.seed,
        "out": args.out,
        "replicates": getattr(args, "replicates", None),
        "workers": args.workers,
        "methods": tuple(m.strip().upper() for m in args.methods.split(",")) if args.methods else None,
    }
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if "methods" in raw:
        raw["methods"] = tuple(m.upper() for m in raw["methods"])
    return ExperimentConfig(datasets=tuple(datasets), **raw).validate()


def _parse_generator_flag(text: str) -> DatasetSpec:
    """``ba:n=2000,m=5,seed=7`` or ``pcg:n=2000,m=5,p=0.3,seed=7[,name=X]``."""
    kind, _, params = text.partition(":")
    values: dict = {}
    for item in filter(None, params.split(",")):
        key, _, val = item.partition("=")
        values[key.strip()] = val.strip()
    try:
        spec = dict(
            name=values.pop("name", kind.upper()),
            generator=kind.lower(),
            n=int(values.pop("n")),
            m=int(values.pop("m")),
            seed=int(values.pop("seed", 0)),
        )
        if "p" in values:
            spec["p"] = float(values.pop("p"))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad generator spec {text!r}: {exc}") from None
    if values:
        raise ConfigError(f"bad generator spec {text!r}: unknown keys {sorted(values)}")
    return DatasetSpec.from_dict(spec)


def _versions() -> dict:
    return {
        "cksrank": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def write_manifest(path: Path, command: str, cfg: ExperimentConfig | None, extra: dict | None = None) -> None:
    """Sidecar ``<file>.meta.json`` holding what is needed to re-run."""
    meta = {
        "file": path.name,
        "command": command,
        "rng": RNG_NAME,
        "versions": _versions(),
    }
    if cfg is not None:
        meta["config_hash"] = cfg.digest()
        meta["master_seed"] = cfg.master_seed
        meta["config"] = asdict(cfg) | {"out": None}
    meta.update(extra or {})
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_rank(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for spec in cfg.datasets:
        g = spec.load()
        partition = louvain(g, cfg.master_seed) if {"CKS", "GLR"} & set(cfg.methods) else None
        for method in cfg.methods:
            table = rank_method(method, g, cfg.master_seed, partition, cfg.workers)
            path = out / f"{spec.name}_{method}.csv"
            write_score_table(table, g, path)
            write_manifest(path, "rank", cfg, {"dataset": spec.name, "method": method})
            log.info("wrote %s", path)
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    runs = []
    for spec in cfg.datasets:
        g = spec.load()
        log.info("dataset %s: n=%d m=%d", spec.name, g.n, g.m)
        run = run_dataset(
            g,
            cfg.methods,
            dataset=spec.name,
            fractions=cfg.fractions,
            probabilities=cfg.probabilities,
            p_act=cfg.activation_probability,
            probability_fraction=cfg.probability_fraction,
            replicates=cfg.replicates,
            master_seed=cfg.master_seed,
            louvain_seed=cfg.master_seed,
            timing=cfg.timing,
            timing_repeats=cfg.timing_repeats,
            workers=cfg.workers,
        )
        runs.append(run)
        outputs = [
            (f"fig4_{spec.name}.csv", run.fraction_curves),
            (f"fig5_{spec.name}.csv", run.probability_curves),
            (f"fig6_{spec.name}.csv", run.distance_curves),
        ]
        for name, curves in outputs:
            write_curves(curves, out / name)
            write_manifest(out / name, "experiment", cfg, {"dataset": spec.name})
        if cfg.timing:
            path = out / f"fig7_{spec.name}.csv"
            write_timings(run.timings, path)
            note = run.timings[0].environment_note if run.timings else ""
            write_manifest(path, "experiment", cfg, {"dataset": spec.name, "environment": note})
    problems, methods, values = result_matrix_rows(runs)
    if len(problems) >= 2 and len(methods) >= 2:
        path = out / "result_matrix.csv"
        write_result_matrix(ResultMatrix(tuple(problems), tuple(methods), values), path)
        write_manifest(path, "experiment", cfg)
    return EXIT_OK


def _read_ranks(path: str) -> dict[str, float]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    try:
        return {r["algorithm"]: float(r["average_rank"]) for r in rows}
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: expected columns algorithm,average_rank ({exc})") from None


def cmd_stats(args: argparse.Namespace) -> int:
    if args.ranks:
        if args.problems is None:
            raise ConfigError("--ranks needs --problems")
        report = report_from_ranks(_read_ranks(args.ranks), args.problems, args.control, args.alpha)
    elif args.matrix:
        report = friedman_report(read_result_matrix(args.matrix), args.control, args.alpha)
    else:
        raise ConfigError("give a result matrix or --ranks")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for path in write_report(report, out):
        write_manifest(path, "stats", None, {"control": args.control, "alpha": args.alpha})
    for c in report.comparisons:
        print(f"{c.algorithm:>6}  z={c.z:8.3f}  p={c.p:.3e}  apv={c.apv:.3e}")
    return EXIT_OK


def cmd_generate(args: argparse.Namespace) -> int:
    if args.kind == "ba":
        g = generate_ba(args.n, args.m, args.seed)
        header = f"BA n={args.n} m={args.m} seed={args.seed}"
    else:
        if args.p is None:
            raise ConfigError("pcg needs --p")
        g = generate_powerlaw_cluster(args.n, args.m, args.p, args.seed)
        header = f"PCG n={args.n} m={args.m} p={args.p} seed={args.seed}"
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(g, path, header=header)
    write_manifest(path, "generate", None, {"generator": header})
    return EXIT_OK


def cmd_summary(args: argparse.Namespace) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["dataset", "nodes", "edges", "communities"])
    for path in args.input:
        g = read_edge_list(path, directed_input=args.directed)
        p = louvain(g, args.seed or 0) if args.communities else None
        s = graph_summary(g, p)
        w.writerow([g.name, s.nodes, s.edges, "" if s.communities is None else s.communities])
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed (Louvain and IC replicates)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--input", action="append", help="edge-list file (repeatable)")
    p.add_argument("--directed", action="store_true", help="inputs are directed (symmetrized)")
    p.add_argument("--generate", action="append", metavar="SPEC",
                   help="synthetic dataset, e.g. ba:n=2000,m=5,seed=7 or pcg:n=2000,m=5,p=0.3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cksrank", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rank", help="write a score table per dataset and method")
    _common(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("experiment", help="run the evaluation sweeps")
    _common(p)
    p.add_argument("--replicates", type=int, help="IC replicates per curve point")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("stats", help="Friedman / Iman-Davenport / Holm report")
    p.add_argument("matrix", nargs="?", help="result matrix CSV (problem,<alg>...)")
    p.add_argument("--ranks", help="CSV of algorithm,average_rank instead of a matrix")
    p.add_argument("--problems", type=int, help="number of problems behind --ranks")
    p.add_argument("--control", default="CKS")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("generate", help="write a synthetic graph as an edge list")
    p.add_argument("kind", choices=("ba", "pcg"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--p", type=float, help="triangle probability (pcg)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("summary", help="node/edge/community counts")
    p.add_argument("input", nargs="+")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--communities", action="store_true", help="run Louvain and count communities")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_summary)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ContractViolation as exc:
        # a broken internal precondition, not bad user input
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (CksError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
