"""Comparison centralities.

All functions return a :class:`~cksrank.cks.ScoreTable` with the same
deterministic ranking contract as the CKS ranking. Notation below: ``k(v)``
degree, ``ks(v)`` global k-shell, ``C(v)`` local clustering coefficient,
``N(v)`` neighbour set.
"""
from __future__ import annotations

from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

import numpy as np

from .cks import ScoreTable, rank_by_cks
from .community import CommunityPartition, louvain
from .graph import UNREACHABLE, Graph, bfs_distances
from .kshell import kshell_decomposition

SOURCE_CHUNK = 64
LID_MAX_RADIUS = 3

METHODS = ("CKS", "ENC", "GLR", "DCL", "LID", "DIL", "BC", "CC")


def _chunks(n: int) -> list[range]:
    return [range(i, min(i + SOURCE_CHUNK, n)) for i in range(0, n, SOURCE_CHUNK)]


def _reduce_sources(fn: Callable, g: Graph, workers: int) -> np.ndarray:
    """Sum per-chunk partial arrays in chunk order.

    The chunking does not depend on ``workers``, so the floating-point result
    is identical for any pool size.
    """
    chunks = _chunks(g.n)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, [g] * len(chunks), chunks))
    else:
        parts = [fn(g, c) for c in chunks]
    total = np.zeros(g.n, dtype=np.float64)
    for part in parts:
        total += part
    return total


def degree_centrality(g: Graph) -> ScoreTable:
    return ScoreTable.from_scores("DEG", g.degree.astype(np.float64))


def _brandes_chunk(g: Graph, sources: range) -> np.ndarray:
    adj = g.adj
    n = g.n
    acc = [0.0] * n
    for s in sources:
        sigma = [0] * n
        dist = [-1] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        sigma[s] = 1
        dist[s] = 0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v] + 1
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                acc[w] += delta[w]
    return np.asarray(acc)


def betweenness_centrality(g: Graph, workers: int = 1) -> ScoreTable:
    """Exact unnormalised betweenness (each unordered pair counted once)."""
    bc = _reduce_sources(_brandes_chunk, g, workers) / 2.0
    return ScoreTable.from_scores("BC", bc)


def _closeness_chunk(g: Graph, sources: range) -> np.ndarray:
    out = np.zeros(g.n, dtype=np.float64)
    for s in sources:
        d = bfs_distances(g, s)
        reach = d[d != UNREACHABLE]
        r = len(reach)
        total = int(reach.sum())
        if r > 1 and g.n > 1:
            out[s] = ((r - 1) / (g.n - 1)) * ((r - 1) / total)
    return out


def closeness_centrality(g: Graph, workers: int = 1) -> ScoreTable:
    """Closeness within the node's component, damped by component size.

    ``CC(v) = ((r-1)/(n-1)) * ((r-1)/sum_u d(v,u))`` with ``r`` the number of
    nodes reachable from ``v`` (itself included); isolated nodes score 0.
    """
    return ScoreTable.from_scores("CC", _reduce_sources(_closeness_chunk, g, workers))


def _neighbour_sum(g: Graph, x: np.ndarray) -> np.ndarray:
    src = np.repeat(np.arange(g.n), g.degree)
    return np.bincount(src, weights=x[g.indices], minlength=g.n)


def enc(g: Graph) -> ScoreTable:
    """Extended neighbourhood coreness: two-level sum of neighbour shells."""
    ks = kshell_decomposition(g).shell.astype(np.float64)
    nc = _neighbour_sum(g, ks)
    return ScoreTable.from_scores("ENC", _neighbour_sum(g, nc))


def _edge_triangles(g: Graph) -> tuple[list[set[int]], dict[tuple[int, int], int]]:
    nsets = [set(nb) for nb in g.adj]
    tri = {(u, v): len(nsets[u] & nsets[v]) for u, v in g.edges()}
    return nsets, tri


def dil(g: Graph) -> ScoreTable:
    """Degree plus importance of lines.

    For an edge ``(i, j)`` lying on ``p`` triangles the line importance is
    ``I = (k(i) - p - 1) * (k(j) - p - 1) / (p/2 + 1)``, and
    ``DIL(i) = k(i) + sum_j I(i, j) * (k(i) - 1) / (k(i) + k(j) - 2)``.
    """
    deg = g.degree.tolist()
    _, tri = _edge_triangles(g)
    score = [float(d) for d in deg]
    for (i, j), p in tri.items():
        importance = (deg[i] - p - 1) * (deg[j] - p - 1) / (p / 2 + 1)
        denom = deg[i] + deg[j] - 2
        if denom == 0:
            continue
        score[i] += importance * (deg[i] - 1) / denom
        score[j] += importance * (deg[j] - 1) / denom
    return ScoreTable.from_scores("DIL", score)


def clustering(g: Graph) -> np.ndarray:
    """Local clustering coefficient, 0 for nodes of degree < 2."""
    nsets, tri = _edge_triangles(g)
    links = np.zeros(g.n, dtype=np.float64)
    for (i, j), p in tri.items():
        links[i] += p
        links[j] += p
    k = g.degree.astype(np.float64)
    # every triangle at v is counted from both of its edges at v
    pairs = k * (k - 1) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(pairs > 0, links / 2 / pairs, 0.0)
    return c


def dcl(g: Graph) -> ScoreTable:
    """Degree, clustering and location.

    ``DCL(v) = ks(v) * k(v) * (1 - C(v)) + sum_{u in N(v)} k(u) * (1 - C(u))``:
    well-placed nodes whose neighbours do not know each other score high.
    """
    k = g.degree.astype(np.float64)
    open_ = 1.0 - clustering(g)
    ks = kshell_decomposition(g).shell.astype(np.float64)
    return ScoreTable.from_scores("DCL", ks * k * open_ + _neighbour_sum(g, k * open_))


def _ball_sizes(g: Graph, v: int, radius: int) -> list[int]:
    """|{u : d(v,u) <= r}| for r = 0..radius, truncated at the eccentricity."""
    adj = g.adj
    seen = {v}
    frontier = [v]
    sizes = [1]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        sizes.append(len(seen))
        frontier = nxt
    return sizes


def lid(g: Graph, max_radius: int = LID_MAX_RADIUS) -> ScoreTable:
    """Local information dimensionality.

    For box radius ``r`` (box size ``l = 2r + 1``) the box around ``v`` holds
    ``n_r`` nodes; its information is ``I_r = -q ln q`` with ``q = n_r / n``.
    The score is the dimension ``-dI/d(ln l)``: minus the least-squares slope
    of ``I_r`` against ``ln l`` over ``r = 0..R``, ``R`` the smaller of
    ``max_radius`` and the eccentricity of ``v``. Isolated nodes score 0.
    """
    out = np.zeros(g.n, dtype=np.float64)
    for v in range(g.n):
        sizes = _ball_sizes(g, v, max_radius)
        if len(sizes) < 2:
            continue
        q = np.asarray(sizes, dtype=np.float64) / g.n
        info = -q * np.log(q)
        x = np.log(2 * np.arange(len(sizes)) + 1.0)
        out[v] = -np.polyfit(x, info, 1)[0]
    return ScoreTable.from_scores("LID", out)


def glr_core_nodes(g: Graph, p: CommunityPartition) -> tuple[list[int], list[int]]:
    """Local critical node and best gateway node of every community.

    The critical node has the most intra-community edges; the gateway has the
    most edges leaving the community (communities without outgoing edges have
    no gateway). Ties go to the lower index.
    """
    comm = p.assignment.tolist()
    critical, gateways = [], []
    for members in p.members:
        intra = {v: 0 for v in members}
        inter = {v: 0 for v in members}
        for v in members:
            for u in g.adj[v]:
                if comm[u] == comm[v]:
                    intra[v] += 1
                else:
                    inter[v] += 1
        critical.append(max(members, key=lambda v: (intra[v], -v)))
        best = max(members, key=lambda v: (inter[v], -v))
        if inter[best] > 0:
            gateways.append(best)
    return critical, gateways


def glr(g: Graph, p: CommunityPartition) -> ScoreTable:
    """Gateway local rank: closeness to the communities' core nodes.

    ``GLR(v) = sum_{c in core} 1 / (1 + d(v, c))`` over the union of critical
    and gateway nodes; unreachable core nodes contribute nothing.
    """
    critical, gateways = glr_core_nodes(g, p)
    core = sorted(set(critical) | set(gateways))
    score = np.zeros(g.n, dtype=np.float64)
    for c in core:
        d = bfs_distances(g, c)
        ok = d != UNREACHABLE
        score[ok] += 1.0 / (1.0 + d[ok])
    return ScoreTable.from_scores("GLR", score)


def rank_method(
    method: str,
    g: Graph,
    seed: int = 0,
    partition: CommunityPartition | None = None,
    workers: int = 1,
) -> ScoreTable:
    """Dispatch by method name; community methods run Louvain when needed."""
    method = method.upper()
    if method == "CKS":
        return rank_by_cks(g, seed, partition)
    if method == "GLR":
        return glr(g, louvain(g, seed) if partition is None else partition)
    if method == "BC":
        return betweenness_centrality(g, workers)
    if method == "CC":
        return closeness_centrality(g, workers)
    simple = {"ENC": enc, "DCL": dcl, "LID": lid, "DIL": dil, "DEG": degree_centrality}
    if method not in simple:
        raise KeyError(f"unknown method {method!r}")
    return simple[method](g)
