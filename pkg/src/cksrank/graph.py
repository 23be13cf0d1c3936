"""Undirected simple graphs over dense node indices.

A :class:`Graph` stores adjacency in CSR form (``indptr``/``indices``) with
each neighbour list sorted ascending, plus the external text label of every
node. Graphs are immutable once built; every algorithm in the package works on
dense indices and only the I/O layer touches labels.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import ParameterError, ParseError

UNREACHABLE = -1
"""Sentinel distance for nodes not reachable from the BFS source."""

COMMENT_PREFIXES = ("#", "%")


@dataclass(frozen=True, eq=False)
class Graph:
    indptr: np.ndarray
    indices: np.ndarray
    labels: tuple[str, ...]
    name: str = ""

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @cached_property
    def adj(self) -> list[list[int]]:
        """Neighbour lists as plain Python lists (fast for scalar loops)."""
        ind = self.indices.tolist()
        ptr = self.indptr.tolist()
        return [ind[ptr[v]:ptr[v + 1]] for v in range(self.n)]

    @cached_property
    def index_of(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edges(self) -> list[tuple[int, int]]:
        """Each undirected edge once, as ``(u, v)`` with ``u < v``, sorted."""
        return [(u, v) for u, nb in enumerate(self.adj) for v in nb if u < v]

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]],
        labels: Sequence[str] | None = None,
        name: str = "",
    ) -> Graph:
        """Build a graph from index pairs, dropping self-loops and duplicates."""
        if labels is None:
            labels = [str(i) for i in range(n)]
        if len(labels) != n:
            raise ParameterError(f"expected {n} labels, got {len(labels)}")
        if len(set(labels)) != n:
            raise ParameterError("node labels must be unique")
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ParameterError("edge endpoint out of range")
        arr = arr[arr[:, 0] != arr[:, 1]]
        both = np.concatenate([arr, arr[:, ::-1]])
        if both.size:
            # unique rows, sorted by (src, dst)
            key = both[:, 0] * n + both[:, 1]
            key = np.unique(key)
            src, dst = key // n, key % n
        else:
            src = dst = np.empty(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(indptr, dst.astype(np.int64), tuple(labels), name)

    def subgraph_edges(self, keep: np.ndarray) -> Graph:
        """Same node set, keeping only arcs where ``keep`` (per CSR slot) holds.

        ``keep`` must be symmetric: slot u->v kept iff slot v->u kept.
        """
        src = np.repeat(np.arange(self.n), self.degree)
        dst = self.indices
        counts = np.bincount(src[keep], minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return Graph(indptr, dst[keep].copy(), self.labels, self.name)


@dataclass(frozen=True)
class GraphSummary:
    nodes: int
    edges: int
    communities: int | None = None
    source_name: str = ""


def parse_edge_list(
    lines: Iterable[str], directed_input: bool = False, name: str = ""
) -> Graph:
    """Parse a whitespace-separated edge list.

    Labels get dense indices in order of first appearance. Directed input is
    symmetrized; self-loops and repeated edges are dropped either way, so the
    flag only documents the provenance of the file.
    """
    index: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    seen_content = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 tokens, found {len(tokens)}", lineno)
        seen_content = True
        a, b = tokens
        ia = index.setdefault(a, len(index))
        ib = index.setdefault(b, len(index))
        edges.append((ia, ib))
    if not seen_content:
        raise ParseError("edge list is empty")
    return Graph.from_edges(len(index), edges, list(index), name=name)


def read_edge_list(path: str | Path, directed_input: bool = False) -> Graph:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_edge_list(fh, directed_input=directed_input, name=path.stem)


def serialize_edge_list(g: Graph) -> list[str]:
    """Edge-list lines that parse back to ``g`` with the same label order.

    Each node is introduced, in index order, by an edge to an already written
    node (or by the pair ``i, i+1`` when ``i`` has no lower neighbour); the
    remaining edges follow in sorted order. Isolated nodes cannot be expressed
    in this format and are lost.
    """
    adj = g.adj
    written = [False] * g.n
    used: set[tuple[int, int]] = set()
    lines = []

    def emit(u: int, v: int) -> None:
        lines.append(f"{g.labels[u]} {g.labels[v]}")
        used.add((min(u, v), max(u, v)))
        written[u] = written[v] = True

    for i in range(g.n):
        if written[i] or not adj[i]:
            continue
        lower = adj[i][0]
        if lower < i and written[lower]:
            emit(lower, i)
        elif i + 1 < g.n and not written[i + 1] and g.has_edge(i, i + 1):
            emit(i, i + 1)
        else:
            emit(i, adj[i][0])
    for u, v in g.edges():
        if (u, v) not in used:
            lines.append(f"{g.labels[u]} {g.labels[v]}")
    return lines


def write_edge_list(g: Graph, out: str | Path | TextIO, header: str | None = None) -> None:
    body = serialize_edge_list(g)
    text = "".join(f"# {h}\n" for h in (header.splitlines() if header else []))
    text += "".join(line + "\n" for line in body)
    if isinstance(out, (str, Path)):
        Path(out).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _pick_targets(
    rng: np.random.Generator, repeated: list[int], m_attach: int
) -> list[int]:
    """m_attach distinct nodes, degree-proportional via the repeated-node list."""
    chosen: list[int] = []
    picked: set[int] = set()
    while len(chosen) < m_attach:
        x = repeated[int(rng.integers(len(repeated)))]
        if x not in picked:
            picked.add(x)
            chosen.append(x)
    return chosen


def _check_growth_params(n: int, m_attach: int) -> None:
    if m_attach < 1 or m_attach >= n:
        raise ParameterError(f"need 1 <= m_attach < n, got m_attach={m_attach}, n={n}")


def generate_ba(n: int, m_attach: int, seed: int) -> Graph:
    """Barabasi-Albert preferential attachment.

    Growth starts from a star on ``m_attach + 1`` nodes (node 0 the hub), so
    the result has exactly ``m_attach * (n - m_attach)`` edges.
    """
    return generate_powerlaw_cluster(n, m_attach, 0.0, seed, name=f"BA_{n}_{m_attach}_{seed}")


def generate_powerlaw_cluster(
    n: int, m_attach: int, p_tri: float, seed: int, name: str | None = None
) -> Graph:
    """Holme-Kim growth: preferential attachment plus triangle closure.

    After each attachment edge, with probability ``p_tri`` the next edge goes
    to a random neighbour of the node just linked (closing a triangle) instead
    of another preferential target. Target choice and triangle decisions use
    separate random streams, so ``p_tri=0`` reproduces :func:`generate_ba`.
    """
    _check_growth_params(n, m_attach)
    if not 0.0 <= p_tri <= 1.0:
        raise ParameterError(f"p_tri must lie in [0, 1], got {p_tri}")
    pa_rng, tri_rng = _streams(seed, 2)
    adj: list[set[int]] = [set() for _ in range(n)]
    edges: list[tuple[int, int]] = []
    repeated: list[int] = []

    def link(u: int, v: int) -> None:
        adj[u].add(v)
        adj[v].add(u)
        edges.append((u, v))
        repeated.append(v)

    for leaf in range(1, m_attach + 1):
        link(leaf, 0)
        repeated.append(leaf)
    for source in range(m_attach + 1, n):
        targets = _pick_targets(pa_rng, repeated, m_attach)
        targets.reverse()

        def next_target() -> int:
            # a triangle step may already have linked a pending PA target
            while targets:
                t = targets.pop()
                if t not in adj[source]:
                    return t
            extra = _pick_targets(pa_rng, repeated, len(adj[source]) + 1)
            return next(x for x in extra if x not in adj[source])

        target = next_target()
        link(source, target)
        for _ in range(m_attach - 1):
            if p_tri > 0.0 and tri_rng.random() < p_tri:
                hood = sorted(w for w in adj[target] if w != source and w not in adj[source])
                if hood:
                    link(source, hood[int(tri_rng.integers(len(hood)))])
                    continue
            target = next_target()
            link(source, target)
        repeated.extend([source] * m_attach)
    if name is None:
        name = f"PCG_{n}_{m_attach}_{p_tri:g}_{seed}"
    return Graph.from_edges(n, edges, name=name)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distance from ``source`` to every node; UNREACHABLE where none."""
    dist = np.full(g.n, UNREACHABLE, dtype=np.int64)
    adj = g.adj
    d = [UNREACHABLE] * g.n
    d[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = d[u] + 1
        for w in adj[u]:
            if d[w] == UNREACHABLE:
                d[w] = du
                queue.append(w)
    dist[:] = d
    return dist


def graph_summary(g: Graph, partition=None) -> GraphSummary:
    communities = None if partition is None else partition.count
    return GraphSummary(g.n, g.m, communities, g.name)
