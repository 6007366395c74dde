"""Topology metrics of a spatial graph.

Edges are the non-zero off-diagonal entries; self loops only feed
``n_self_loops``. Shortest paths are hop counts. Path metrics of a
disconnected graph are taken within components so every value stays finite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import astuple, dataclass, fields

import numpy as np

from .graph_learning import SpatialGraph


@dataclass(frozen=True)
class TopologyEmbedding:
    density: float
    local_efficiency: float
    n_components: float
    largest_component_size: float
    avg_degree: float
    avg_weight: float
    n_self_loops: float
    char_path_length: float
    mean_eccentricity: float
    radius: float
    diameter: float

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def values(self) -> tuple[float, ...]:
        return astuple(self)


N_TOPOLOGY_FEATURES = len(fields(TopologyEmbedding))


def _components(adj):
    """Union-find over the edge list; returns a component label per vertex."""
    n = adj.shape[0]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in zip(*np.nonzero(np.triu(adj, 1))):
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the smaller index as root so labels are canonical
            parent[max(ra, rb)] = min(ra, rb)
    return np.array([find(a) for a in range(n)])


def _bfs_distances(neighbors, source, allowed=None):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        a = queue.popleft()
        for b in neighbors[a]:
            if b not in dist and (allowed is None or b in allowed):
                dist[b] = dist[a] + 1
                queue.append(b)
    return dist


def _efficiency(neighbors, nodes):
    """Mean inverse hop distance over ordered pairs of ``nodes``, paths restricted to them."""
    n = len(nodes)
    if n < 2:
        return 0.0
    allowed = set(nodes)
    total = 0.0
    for a in nodes:
        for b, d in _bfs_distances(neighbors, a, allowed).items():
            if b != a:
                total += 1.0 / d
    return total / (n * (n - 1))


def topology_embedding(g: SpatialGraph) -> TopologyEmbedding:
    w = g.weights
    if np.any(w < 0):
        raise ValueError("graph weights must be non-negative")
    if not np.array_equal(w, w.T):
        raise ValueError("graph weights must be symmetric")
    n = w.shape[0]
    adj = w != 0
    n_self_loops = int(np.count_nonzero(np.diag(adj)))
    np.fill_diagonal(adj, False)
    neighbors = [np.flatnonzero(adj[a]).tolist() for a in range(n)]
    degrees = adj.sum(axis=1)
    n_edges = int(degrees.sum()) // 2
    density = n_edges / (n * (n - 1) / 2) if n > 1 else 0.0

    source = g.source_weights if g.source_weights is not None else w
    off_diag = ~np.eye(n, dtype=bool)
    avg_weight = float(source[off_diag].mean()) if n > 1 else 0.0

    labels = _components(adj)
    roots, sizes = np.unique(labels, return_counts=True)
    # np.unique sorts roots, and each root is its component's lowest vertex,
    # so argmax breaks size ties toward the lowest vertex index
    main_root = roots[np.argmax(sizes)]

    path_sum = 0
    path_count = 0
    ecc = np.zeros(n)
    for a in range(n):
        dist = _bfs_distances(neighbors, a)
        path_sum += sum(dist.values())
        path_count += len(dist) - 1
        ecc[a] = max(dist.values())
    char_path_length = path_sum / path_count if path_count else 0.0
    main_ecc = ecc[labels == main_root]

    local = [_efficiency(neighbors, neighbors[a]) for a in range(n)]

    return TopologyEmbedding(
        density=float(density),
        local_efficiency=float(np.mean(local)) if n else 0.0,
        n_components=float(len(roots)),
        largest_component_size=float(sizes.max()),
        avg_degree=float(degrees.mean()),
        avg_weight=avg_weight,
        n_self_loops=float(n_self_loops),
        char_path_length=float(char_path_length),
        mean_eccentricity=float(main_ecc.mean()),
        radius=float(main_ecc.min()),
        diameter=float(main_ecc.max()),
    )
