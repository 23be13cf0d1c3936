"""Louvain community detection and Newman modularity."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation
from .graph import Graph

GAIN_TOLERANCE = 1e-7


@dataclass(frozen=True, eq=False)
class CommunityPartition:
    assignment: np.ndarray
    members: tuple[tuple[int, ...], ...]

    @property
    def count(self) -> int:
        return len(self.members)

    @property
    def community_sizes(self) -> np.ndarray:
        return np.array([len(m) for m in self.members], dtype=np.int64)

    @classmethod
    def from_assignment(cls, assignment: Sequence[int], canonical: bool = True) -> CommunityPartition:
        """Build from a node -> community-id sequence.

        With ``canonical`` the ids are renumbered by smallest member index, so
        equal partitions compare equal regardless of the original labelling.
        """
        a = np.asarray(assignment, dtype=np.int64)
        if canonical:
            remap: dict[int, int] = {}
            a = np.array([remap.setdefault(int(c), len(remap)) for c in a], dtype=np.int64)
        count = int(a.max()) + 1 if a.size else 0
        members: list[list[int]] = [[] for _ in range(count)]
        for v, c in enumerate(a.tolist()):
            members[c].append(v)
        if any(not m for m in members):
            raise ContractViolation("community ids must be contiguous from 0")
        return cls(a, tuple(tuple(m) for m in members))

    @classmethod
    def singletons(cls, n: int) -> CommunityPartition:
        return cls.from_assignment(range(n))


def modularity(g: Graph, p: CommunityPartition) -> float:
    """Newman modularity ``sum_c e_c/m - (d_c/2m)^2``."""
    if len(p.assignment) != g.n:
        raise ContractViolation("partition does not cover the graph")
    if g.m == 0:
        raise ContractViolation("modularity is undefined for a graph without edges")
    src = np.repeat(np.arange(g.n), g.degree)
    comm = p.assignment
    intra = np.bincount(comm[src][comm[src] == comm[g.indices]], minlength=p.count) / 2
    deg = np.bincount(comm, weights=g.degree, minlength=p.count)
    m = g.m
    return float(np.sum(intra / m - (deg / (2 * m)) ** 2))


class _Level:
    """Weighted graph for one Louvain level. ``loops[i]`` is internal weight."""

    def __init__(self, nbrs: list[dict[int, float]], loops: list[float]):
        self.nbrs = nbrs
        self.loops = loops
        self.strength = [sum(nb.values()) + 2 * lp for nb, lp in zip(nbrs, loops)]

    def __len__(self) -> int:
        return len(self.nbrs)

    @classmethod
    def from_graph(cls, g: Graph) -> _Level:
        return cls([{v: 1.0 for v in nb} for nb in g.adj], [0.0] * g.n)

    def aggregate(self, comm: list[int], count: int) -> _Level:
        nbrs: list[dict[int, float]] = [defaultdict(float) for _ in range(count)]
        loops = [0.0] * count
        for i, nb in enumerate(self.nbrs):
            ci = comm[i]
            loops[ci] += self.loops[i]
            for j, w in nb.items():
                cj = comm[j]
                if ci == cj:
                    loops[ci] += w / 2  # each intra edge is seen from both ends
                else:
                    nbrs[ci][cj] += w
        return _Level([dict(nb) for nb in nbrs], loops)


def _move_nodes(level: _Level, two_m: float, order: Sequence[int]) -> list[int]:
    """Local moving phase; returns the community of every level node."""
    comm = list(range(len(level)))
    tot = list(level.strength)
    k = level.strength
    threshold = GAIN_TOLERANCE * two_m / 2
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            ki = k[i]
            links: dict[int, float] = defaultdict(float)
            for j, w in level.nbrs[i].items():
                links[comm[j]] += w
            tot[ci] -= ki
            # gains are in units of m * dQ; staying put is the reference
            stay = links.get(ci, 0.0) - tot[ci] * ki / two_m
            best, best_gain = ci, stay
            for c in sorted(links):
                if c == ci:
                    continue
                gain = links[c] - tot[c] * ki / two_m
                if gain > best_gain:
                    best, best_gain = c, gain
            if best != ci and best_gain - stay <= threshold:
                best = ci
            tot[best] += ki
            if best != ci:
                comm[i] = best
                improved = True
    return comm


def louvain_levels(g: Graph, seed: int = 0) -> list[CommunityPartition]:
    """Partition of the original nodes after each Louvain aggregation level.

    The last entry is the final result. Node visiting order is the ascending
    index order permuted once per level by a generator seeded with ``seed``.
    """
    if g.n == 0:
        return [CommunityPartition.singletons(0)]
    if g.m == 0:
        return [CommunityPartition.singletons(g.n)]
    rng = np.random.default_rng(seed)
    two_m = 2.0 * g.m
    level = _Level.from_graph(g)
    node_comm = list(range(g.n))
    levels: list[CommunityPartition] = []
    while True:
        order = rng.permutation(len(level)).tolist()
        comm = _move_nodes(level, two_m, order)
        remap: dict[int, int] = {}
        comm = [remap.setdefault(c, len(remap)) for c in comm]
        if len(remap) == len(level):
            break
        node_comm = [comm[c] for c in node_comm]
        levels.append(CommunityPartition.from_assignment(node_comm))
        level = level.aggregate(comm, len(remap))
    if not levels:
        levels.append(CommunityPartition.singletons(g.n))
    return levels


def louvain(g: Graph, seed: int = 0) -> CommunityPartition:
    return louvain_levels(g, seed)[-1]
