"""K-shell decomposition, globally and inside isolated communities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .community import CommunityPartition
from .errors import ContractViolation
from .graph import Graph


@dataclass(frozen=True, eq=False)
class ShellAssignment:
    shell: np.ndarray

    @property
    def max_shell(self) -> int:
        return int(self.shell.max()) if self.shell.size else 0


@dataclass(frozen=True, eq=False)
class CommunityShellAssignment:
    cks: np.ndarray
    shells_per_community: tuple[tuple[int, ...], ...]


def kshell_decomposition(g: Graph) -> ShellAssignment:
    """Peel the graph: at stage k remove every node of residual degree <= k.

    Bucket-queue variant of the Batagelj-Zaversnik core algorithm, O(n + m).
    Nodes whose residual degree is already 0 when first reached (isolated
    nodes, star centres) land in shell 1, never 0.
    """
    n = g.n
    if n == 0:
        return ShellAssignment(np.zeros(0, dtype=np.int64))
    deg = g.degree.tolist()
    adj = g.adj
    max_deg = max(deg)
    # nodes sorted by degree with bucket start offsets
    bin_start = [0] * (max_deg + 2)
    for d in deg:
        bin_start[d + 1] += 1
    for d in range(1, max_deg + 2):
        bin_start[d] += bin_start[d - 1]
    pos = [0] * n
    vert = [0] * n
    fill = bin_start[:]
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    for i in range(n):
        v = vert[i]
        dv = deg[v]
        for u in adj[v]:
            du = deg[u]
            if du > dv:
                # swap u to the front of its bucket, then shrink that bucket
                pw = bin_start[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pos[u]
                    vert[pos[u]], vert[pos[w]] = u, w
                bin_start[du] += 1
                deg[u] = du - 1
    shell = np.maximum(np.asarray(deg, dtype=np.int64), 1)
    return ShellAssignment(shell)


def isolate_communities(g: Graph, p: CommunityPartition) -> Graph:
    """Drop every edge whose endpoints lie in different communities."""
    if len(p.assignment) != g.n:
        raise ContractViolation("partition does not cover the graph")
    src = np.repeat(np.arange(g.n), g.degree)
    keep = p.assignment[src] == p.assignment[g.indices]
    return g.subgraph_edges(keep)


def community_kshell(g: Graph, p: CommunityPartition) -> CommunityShellAssignment:
    """K-shell of every node computed inside its own (isolated) community.

    The isolated graph splits into one component per community, and peeling
    never crosses components, so a single global peel of it equals peeling
    each community separately.
    """
    cks = kshell_decomposition(isolate_communities(g, p)).shell
    shells = tuple(
        tuple(sorted(set(cks[list(members)].tolist()))) for members in p.members
    )
    return CommunityShellAssignment(cks, shells)
