"""Evaluation sweeps: infected scale vs spreader fraction and vs activation
probability, average spreader distance, and ranking time."""
from __future__ import annotations

import csv
import itertools
import platform
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import rank_method
from .cks import ScoreTable
from .community import louvain
from .diffusion import SeedSet, ic_monte_carlo, select_seeds
from .errors import ParameterError
from .graph import UNREACHABLE, Graph, bfs_distances

SMALL_FRACTIONS = (0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.1)
LARGE_FRACTIONS = (0.005, 0.01, 0.015, 0.02, 0.025, 0.03, 0.035, 0.04)
PROBABILITIES = (0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2, 0.225, 0.25)
DEFAULT_P = 0.1
DEFAULT_FRACTION = 0.03
DEFAULT_REPLICATES = 100
LARGE_GRAPH_NODES = 2000

CURVE_HEADER = ("method", "dataset", "x_name", "x", "mean", "std", "replicates")
TIMING_HEADER = ("method", "dataset", "seconds")


def default_fractions(n: int) -> tuple[float, ...]:
    """Sweep set by graph size; graphs of exactly 2000 nodes count as large."""
    return LARGE_FRACTIONS if n >= LARGE_GRAPH_NODES else SMALL_FRACTIONS


@dataclass(frozen=True)
class CurvePoint:
    x: float
    mean: float
    std: float
    replicates: int


@dataclass(frozen=True)
class ExperimentCurve:
    method: str
    dataset: str
    x_name: str
    points: tuple[CurvePoint, ...]

    def __post_init__(self):
        xs = [p.x for p in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ParameterError("curve x values must be strictly increasing")
        if any(p.replicates < 1 for p in self.points):
            raise ParameterError("every curve point needs at least one replicate")


@dataclass(frozen=True)
class TimingRecord:
    method: str
    dataset: str
    seconds: float
    environment_note: str = ""


@dataclass(frozen=True)
class SpreaderDistance:
    mean: float
    pairs: int
    unreachable_pairs: int


def _check_grid(values: Sequence[float], low_open: bool, what: str) -> list[float]:
    vals = [float(v) for v in values]
    if not vals:
        raise ParameterError(f"{what} grid is empty")
    for v in vals:
        if v > 1.0 or v < 0.0 or (low_open and v == 0.0):
            raise ParameterError(f"{what} value {v} out of range")
    return sorted(set(vals))


def infected_vs_fraction(
    g: Graph,
    table: ScoreTable,
    fractions: Sequence[float],
    p_act: float = DEFAULT_P,
    replicates: int = DEFAULT_REPLICATES,
    master_seed: int = 0,
    dataset: str = "",
    workers: int = 1,
) -> ExperimentCurve:
    """Final infected scale for the top-ranked seeds at each fraction.

    Every fraction reuses the same replicate seeds, so the curve is coupled:
    per replicate the infected set can only grow with the fraction.
    """
    points = []
    for f in _check_grid(fractions, True, "spreader fraction"):
        mc = ic_monte_carlo(g, select_seeds(table, f, g.n), p_act, replicates, master_seed, workers)
        points.append(CurvePoint(f, mc.mean, mc.std, mc.replicates))
    return ExperimentCurve(table.method, dataset, "spreader_fraction", tuple(points))


def infected_vs_probability(
    g: Graph,
    table: ScoreTable,
    probabilities: Sequence[float] = PROBABILITIES,
    fraction: float = DEFAULT_FRACTION,
    replicates: int = DEFAULT_REPLICATES,
    master_seed: int = 0,
    dataset: str = "",
    workers: int = 1,
) -> ExperimentCurve:
    seeds = select_seeds(table, fraction, g.n)
    points = []
    for p in _check_grid(probabilities, False, "activation probability"):
        mc = ic_monte_carlo(g, seeds, p, replicates, master_seed, workers)
        points.append(CurvePoint(p, mc.mean, mc.std, mc.replicates))
    return ExperimentCurve(table.method, dataset, "activation_probability", tuple(points))


def average_spreader_distance(g: Graph, s: SeedSet) -> SpreaderDistance:
    """Mean hop distance over unordered seed pairs joined by some path.

    Pairs in different components are left out of the mean and counted in
    ``unreachable_pairs``; the mean is NaN when no pair is connected.
    """
    seeds = list(s.seeds)
    if len(seeds) < 2:
        raise ParameterError("average spreader distance needs at least two seeds")
    total = 0
    pairs = 0
    unreachable = 0
    for i, a in enumerate(seeds[:-1]):
        d = bfs_distances(g, a)[seeds[i + 1:]]
        ok = d != UNREACHABLE
        total += int(d[ok].sum())
        pairs += int(ok.sum())
        unreachable += int((~ok).sum())
    mean = total / pairs if pairs else float("nan")
    return SpreaderDistance(mean, pairs, unreachable)


def spreader_distance_curve(
    g: Graph, table: ScoreTable, fractions: Sequence[float], dataset: str = ""
) -> ExperimentCurve:
    """Average spreader distance per fraction.

    The distance depends only on the seed set, not on any cascade, so each
    point is a single exact evaluation (std 0, one replicate).
    """
    points = []
    for f in _check_grid(fractions, True, "spreader fraction"):
        seeds = select_seeds(table, f, g.n)
        if len(seeds.seeds) < 2:
            continue
        points.append(CurvePoint(f, average_spreader_distance(g, seeds).mean, 0.0, 1))
    return ExperimentCurve(table.method, dataset, "spreader_fraction", tuple(points))


def environment_note() -> str:
    return f"python {platform.python_version()} on {platform.machine()} ({platform.system()})"


def time_ranking(
    method: str,
    g: Graph,
    seed: int = 0,
    repeats: int = 3,
    warmup: int = 1,
    workers: int = 1,
) -> TimingRecord:
    """Median wall time of a full ranking pass (Louvain included where used)."""
    for _ in range(warmup):
        rank_method(method, g, seed, workers=workers)
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        rank_method(method, g, seed, workers=workers)
        runs.append(time.perf_counter() - t0)
    return TimingRecord(method.upper(), g.name, statistics.median(runs), environment_note())


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def write_curves(curves: Sequence[ExperimentCurve], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for c in curves:
            for p in c.points:
                w.writerow([c.method, c.dataset, c.x_name, _fmt(p.x), _fmt(p.mean), _fmt(p.std), p.replicates])


def read_curves(path: str | Path) -> list[ExperimentCurve]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    curves = []
    key = lambda r: (r["method"], r["dataset"], r["x_name"])  # noqa: E731
    for (method, dataset, x_name), group in itertools.groupby(rows, key=key):
        pts = tuple(
            CurvePoint(float(r["x"]), float(r["mean"]), float(r["std"]), int(r["replicates"]))
            for r in group
        )
        curves.append(ExperimentCurve(method, dataset, x_name, pts))
    return curves


def write_timings(records: Sequence[TimingRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TIMING_HEADER)
        for r in records:
            w.writerow([r.method, r.dataset, f"{r.seconds:.6g}"])


@dataclass
class DatasetRun:
    dataset: str
    fraction_curves: list[ExperimentCurve] = field(default_factory=list)
    probability_curves: list[ExperimentCurve] = field(default_factory=list)
    distance_curves: list[ExperimentCurve] = field(default_factory=list)
    timings: list[TimingRecord] = field(default_factory=list)


def run_dataset(
    g: Graph,
    methods: Sequence[str],
    *,
    dataset: str | None = None,
    fractions: Sequence[float] | None = None,
    probabilities: Sequence[float] = PROBABILITIES,
    p_act: float = DEFAULT_P,
    probability_fraction: float = DEFAULT_FRACTION,
    replicates: int = DEFAULT_REPLICATES,
    master_seed: int = 0,
    louvain_seed: int = 0,
    timing: bool = True,
    timing_repeats: int = 3,
    workers: int = 1,
) -> DatasetRun:
    """Every sweep for one graph and a list of methods.

    Each method is ranked once; Louvain runs once and its partition is shared
    by the community-based methods.
    """
    dataset = dataset or g.name
    fractions = default_fractions(g.n) if fractions is None else fractions
    partition = louvain(g, louvain_seed) if {"CKS", "GLR"} & {m.upper() for m in methods} else None
    run = DatasetRun(dataset)
    for method in methods:
        table = rank_method(method, g, louvain_seed, partition, workers)
        run.fraction_curves.append(
            infected_vs_fraction(g, table, fractions, p_act, replicates, master_seed, dataset, workers)
        )
        run.probability_curves.append(
            infected_vs_probability(
                g, table, probabilities, probability_fraction, replicates, master_seed, dataset, workers
            )
        )
        run.distance_curves.append(spreader_distance_curve(g, table, fractions, dataset))
        if timing:
            rec = time_ranking(method, g, louvain_seed, repeats=timing_repeats, workers=workers)
            run.timings.append(TimingRecord(rec.method, dataset, rec.seconds, rec.environment_note))
    return run


def result_matrix_rows(runs: Sequence[DatasetRun]) -> tuple[list[str], list[str], np.ndarray]:
    """Problems (dataset x fraction) by methods, from the fraction sweeps."""
    methods = [c.method for c in runs[0].fraction_curves]
    problems: list[str] = []
    rows: list[list[float]] = []
    for run in runs:
        by_method = {c.method: c for c in run.fraction_curves}
        if list(by_method) != methods:
            raise ParameterError("every dataset must be run with the same methods")
        for i, point in enumerate(by_method[methods[0]].points):
            problems.append(f"{run.dataset}@{_fmt(point.x)}")
            rows.append([by_method[m].points[i].mean for m in methods])
    return problems, methods, np.asarray(rows, dtype=np.float64)
