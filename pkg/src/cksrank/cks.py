"""Community K-Shell scoring.

A node is scored by how its edges spread over the community shells of every
community it touches. For a node ``v`` and community ``c`` let ``eta[s]`` be
the number of ``v``'s neighbours in ``c`` whose community shell is ``s`` and
``eta_c`` their total. The K-shell entropy is the shell-weighted entropy

    KSE(v, c) = -sum_s s * (eta[s] / eta_c) * log10(eta[s] / eta_c)

and the node score sums ``size(c) * KSE(v, c) * eta_c`` over all touched
communities.
"""
from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, TextIO

import numpy as np

from .community import CommunityPartition, louvain
from .errors import ContractViolation
from .graph import Graph
from .kshell import CommunityShellAssignment, community_kshell

LOG_BASE = 10.0


@dataclass(frozen=True)
class ConnectionProfile:
    node: int
    community: int
    eta_per_shell: Mapping[int, int]

    @property
    def eta_total(self) -> int:
        return sum(self.eta_per_shell.values())


@dataclass(frozen=True, eq=False)
class ScoreTable:
    method: str
    scores: np.ndarray
    rank_order: np.ndarray

    @classmethod
    def from_scores(cls, method: str, scores) -> ScoreTable:
        s = np.asarray(scores, dtype=np.float64)
        if not np.all(np.isfinite(s)):
            raise ContractViolation(f"{method}: scores must be finite")
        # primary key: score descending; ties by ascending node index
        order = np.lexsort((np.arange(len(s)), -s))
        return cls(method, s, order)

    def ranks(self) -> np.ndarray:
        """1-based rank of every node."""
        r = np.empty(len(self.scores), dtype=np.int64)
        r[self.rank_order] = np.arange(1, len(self.scores) + 1)
        return r

    def top(self, k: int) -> np.ndarray:
        return self.rank_order[:k]


def write_score_table(table: ScoreTable, g: Graph, out: str | Path | TextIO) -> None:
    """CSV ``node,score,rank`` in rank order, scores to 12 significant digits."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_score_table(table, g, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["node", "score", "rank"])
    for rank, v in enumerate(table.rank_order.tolist(), start=1):
        w.writerow([g.labels[v], f"{table.scores[v]:.12g}", rank])


def connection_profile(
    g: Graph,
    p: CommunityPartition,
    cksa: CommunityShellAssignment,
    v: int,
    c: int,
) -> ConnectionProfile:
    counts = Counter(
        int(cksa.cks[u]) for u in g.adj[v] if p.assignment[u] == c
    )
    if not counts:
        raise ContractViolation(f"node {v} has no neighbour in community {c}")
    return ConnectionProfile(v, c, dict(sorted(counts.items())))


def kse(profile: ConnectionProfile) -> float:
    return _kse(profile.eta_per_shell)


def _kse(eta: Mapping[int, int]) -> float:
    total = sum(eta.values())
    if total <= 0:
        raise ContractViolation("K-shell entropy needs at least one connection")
    acc = 0.0
    for shell, count in eta.items():
        if count > 0:
            q = count / total
            acc -= shell * q * math.log(q, LOG_BASE)
    return acc + 0.0  # normalise -0.0


def _node_profiles(
    adj_v: list[int], comm: list[int], cks: list[int]
) -> dict[int, Counter]:
    by_comm: dict[int, Counter] = {}
    for u in adj_v:
        by_comm.setdefault(comm[u], Counter())[cks[u]] += 1
    return by_comm


def cks_score(
    g: Graph,
    p: CommunityPartition,
    cksa: CommunityShellAssignment,
    v: int,
    include_own: bool = True,
) -> float:
    """Score of a single node.

    ``include_own=False`` drops the term for ``v``'s own community, leaving
    only connections that bridge into other communities.
    """
    comm = p.assignment.tolist()
    cks = cksa.cks.tolist()
    sizes = p.community_sizes.tolist()
    return _score(g.adj[v], comm, cks, sizes, comm[v] if not include_own else None)


def _score(adj_v, comm, cks, sizes, skip) -> float:
    score = 0.0
    for c, eta in sorted(_node_profiles(adj_v, comm, cks).items()):
        if c == skip:
            continue
        score += sizes[c] * _kse(eta) * sum(eta.values())
    return score


def cks_scores(
    g: Graph,
    p: CommunityPartition,
    cksa: CommunityShellAssignment,
    include_own: bool = True,
) -> np.ndarray:
    comm = p.assignment.tolist()
    cks = cksa.cks.tolist()
    sizes = p.community_sizes.tolist()
    adj = g.adj
    return np.array(
        [
            _score(adj[v], comm, cks, sizes, None if include_own else comm[v])
            for v in range(g.n)
        ],
        dtype=np.float64,
    )


def rank_by_cks(
    g: Graph,
    seed: int = 0,
    partition: CommunityPartition | None = None,
    include_own: bool = True,
) -> ScoreTable:
    """Louvain, then community shells, then a score for every node."""
    p = louvain(g, seed) if partition is None else partition
    cksa = community_kshell(g, p)
    return ScoreTable.from_scores("CKS", cks_scores(g, p, cksa, include_own))
