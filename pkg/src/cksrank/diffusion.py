"""Independent Cascade simulation.

Every cascade is driven by one uniform draw per adjacency slot (arc
``u -> v``): the arc is *live* when its draw is below the activation
probability. A newly infected ``u`` infects each still-susceptible neighbour
``v`` exactly when ``u -> v`` is live. Each arc is examined at most once (the
round after its tail was infected), so this is the usual single-attempt IC
process, and replicates that share draws are coupled: a larger seed set or a
larger probability can only infect a superset.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

import numpy as np

from .cks import ScoreTable
from .errors import ParameterError
from .graph import Graph

RNG_NAME = "numpy-Philox4x64/SeedSequence(master_seed, spawn_key=(replicate,))"
REPLICATE_CHUNK = 256
BLOCK_MAX_ARCS = 2048


@dataclass(frozen=True)
class SeedSet:
    seeds: tuple[int, ...]
    fraction: float
    method: str


@dataclass(frozen=True)
class CascadeResult:
    infected_count: int
    infected_scale: float
    rounds: int
    replicate_seed: int


@dataclass(frozen=True)
class MonteCarloResult:
    mean: float
    std: float
    results: tuple[CascadeResult, ...]

    @property
    def replicates(self) -> int:
        return len(self.results)


def seed_count(fraction: float, n: int) -> int:
    """``max(1, round_half_up(fraction * n))``, immune to binary rounding."""
    k = (Decimal(repr(fraction)) * n).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    return max(1, int(k))


def select_seeds(table: ScoreTable, fraction: float, n: int) -> SeedSet:
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"spreader fraction must lie in (0, 1], got {fraction}")
    k = min(seed_count(fraction, n), len(table.rank_order))
    top = table.rank_order[:k]
    return SeedSet(tuple(sorted(int(v) for v in top)), fraction, table.method)


def derive_seed(master_seed: int, replicate: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(replicate,))
    return int(ss.generate_state(1, np.uint64)[0])


def replicate_rng(replicate_seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(replicate_seed))


def live_arcs(g: Graph, p_act: float, rng: np.random.Generator) -> np.ndarray:
    """Boolean mask over adjacency slots: which arcs would transmit."""
    return rng.random(len(g.indices)) < p_act


def _check_probability(p_act: float) -> None:
    if not 0.0 <= p_act <= 1.0:
        raise ParameterError(f"activation probability must lie in [0, 1], got {p_act}")


def cascade(
    g: Graph,
    seeds,
    live: np.ndarray,
    attempts: list[tuple[int, int]] | None = None,
) -> tuple[np.ndarray, int]:
    """Run synchronous rounds over fixed arc outcomes.

    Returns the infected mask and the number of rounds that infected anyone.
    When ``attempts`` is given, every (source, target) infection attempt is
    appended to it.
    """
    infected = np.zeros(g.n, dtype=bool)
    frontier = np.unique(np.asarray(seeds, dtype=np.int64))
    infected[frontier] = True
    indptr, indices = g.indptr, g.indices
    rounds = 0
    while frontier.size:
        starts = indptr[frontier]
        lens = indptr[frontier + 1] - starts
        total = int(lens.sum())
        if total == 0:
            break
        # flat slot ids of all arcs leaving the frontier
        offsets = np.repeat(starts - np.concatenate(([0], np.cumsum(lens)[:-1])), lens)
        slots = offsets + np.arange(total)
        targets = indices[slots]
        susceptible = ~infected[targets]
        if attempts is not None:
            tails = np.repeat(frontier, lens)[susceptible]
            attempts.extend(zip(tails.tolist(), targets[susceptible].tolist()))
        hit = targets[susceptible & live[slots]]
        if hit.size == 0:
            break
        frontier = np.unique(hit)
        infected[frontier] = True
        rounds += 1
    return infected, rounds


def ic_single_run(g: Graph, s: SeedSet, p_act: float, replicate_seed: int) -> CascadeResult:
    _check_probability(p_act)
    live = live_arcs(g, p_act, replicate_rng(replicate_seed))
    infected, rounds = cascade(g, s.seeds, live)
    count = int(infected.sum())
    return CascadeResult(count, count / g.n, rounds, replicate_seed)


def cascade_block(g: Graph, seeds, live: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run ``len(live)`` cascades at once, one per row of arc outcomes.

    Row ``r`` of the result equals ``cascade(g, seeds, live[r])``; the rounds
    are advanced for all rows together. Returns (infected counts, rounds).
    """
    reps = live.shape[0]
    tails = np.repeat(np.arange(g.n), g.degree)
    # arcs grouped by head: group v occupies the slots indptr[v]:indptr[v+1]
    by_head = np.lexsort((tails, g.indices))
    tails, live = tails[by_head], live[:, by_head]
    has_arcs = np.flatnonzero(g.degree > 0)
    starts = g.indptr[has_arcs]
    infected = np.zeros((reps, g.n), dtype=bool)
    infected[:, np.asarray(seeds, dtype=np.int64)] = True
    frontier = infected.copy()
    rounds = np.zeros(reps, dtype=np.int64)
    while has_arcs.size:
        hit = frontier[:, tails] & live
        newly = np.zeros_like(infected)
        newly[:, has_arcs] = np.logical_or.reduceat(hit, starts, axis=1)
        newly &= ~infected
        grew = newly.any(axis=1)
        if not grew.any():
            break
        rounds += grew
        infected |= newly
        frontier = newly
    return infected.sum(axis=1), rounds


def _run_block(g: Graph, s: SeedSet, p_act: float, master_seed: int, block: range):
    seeds = [derive_seed(master_seed, r) for r in block]
    if len(g.indices) > BLOCK_MAX_ARCS:
        # frontier-only rounds touch fewer arcs than whole-matrix rounds here
        return [ic_single_run(g, s, p_act, x) for x in seeds]
    live = np.vstack([live_arcs(g, p_act, replicate_rng(x)) for x in seeds])
    counts, rounds = cascade_block(g, s.seeds, live)
    return [
        CascadeResult(int(c), int(c) / g.n, int(k), x)
        for c, k, x in zip(counts.tolist(), rounds.tolist(), seeds)
    ]


def ic_monte_carlo(
    g: Graph,
    s: SeedSet,
    p_act: float,
    replicates: int,
    master_seed: int,
    workers: int = 1,
) -> MonteCarloResult:
    """Mean and sample std of the final infected scale over replicates.

    Replicate ``r`` always draws from ``derive_seed(master_seed, r)``, so the
    outcome does not depend on ``workers`` or scheduling. Moments are taken
    from the integer counts exactly and rounded once.
    """
    if replicates < 1:
        raise ParameterError("need at least one replicate")
    _check_probability(p_act)
    blocks = [
        range(i, min(i + REPLICATE_CHUNK, replicates))
        for i in range(0, replicates, REPLICATE_CHUNK)
    ]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                _run_block, *zip(*[(g, s, p_act, master_seed, b) for b in blocks])
            ))
    else:
        parts = [_run_block(g, s, p_act, master_seed, b) for b in blocks]
    results = tuple(r for part in parts for r in part)
    counts = [r.infected_count for r in results]
    total = sum(counts)
    mean = float(Fraction(total, replicates * g.n))
    if replicates > 1:
        ss = replicates * sum(c * c for c in counts) - total * total
        var = Fraction(ss, replicates * (replicates - 1) * g.n * g.n)
    else:
        var = Fraction(0)
    return MonteCarloResult(mean, math.sqrt(var), results)
