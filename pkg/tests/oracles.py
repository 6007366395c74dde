"""Brute-force reference implementations used only by the tests.

Each one recomputes a quantity from its definition with plain loops and
shares no code with the package.
"""

import itertools
import math

import numpy as np


def dense_w_bruteforce(X, L):
    """Spatiotemporal adjacency assembled entry by entry.

    Vertex (i, k) sits at flat index k*S + i. Block (row time k, column time
    k-l) carries B_{k,l}(i, j) = |xt(i, k-l) * xt(j, k)| with i the row
    channel; the transposed block mirrors it.
    """
    X = np.asarray(X, dtype=float)
    S, T = X.shape
    col_mean = [sum(X[i][k] for i in range(S)) / S for k in range(T)]
    row_mean = [sum(X[i][k] for k in range(T)) / T for i in range(S)]
    xs = [[X[i][k] - col_mean[k] for k in range(T)] for i in range(S)]
    xt = [[X[i][k] - row_mean[i] for k in range(T)] for i in range(S)]
    N = S * T
    W = np.zeros((N, N))
    for u in range(N):
        i, k = u % S, u // S
        for v in range(N):
            j, k2 = v % S, v // S
            if k == k2:
                W[u, v] = abs(xs[i][k] * xs[j][k])
            elif 1 <= k - k2 <= L:
                W[u, v] = abs(xt[i][k2] * xt[j][k])
            elif 1 <= k2 - k <= L:
                W[u, v] = abs(xt[j][k] * xt[i][k2])
    return W


def _floyd_warshall(adj, nodes):
    idx = {n: a for a, n in enumerate(nodes)}
    n = len(nodes)
    d = [[math.inf] * n for _ in range(n)]
    for a in range(n):
        d[a][a] = 0
    for p, q in itertools.permutations(nodes, 2):
        if adj[p][q]:
            d[idx[p]][idx[q]] = 1
    for m in range(n):
        for a in range(n):
            for b in range(n):
                if d[a][m] + d[m][b] < d[a][b]:
                    d[a][b] = d[a][m] + d[m][b]
    return d


def topology_bruteforce(binary, pre_threshold=None):
    """All eleven metrics from all-pairs Floyd-Warshall distances."""
    B = np.asarray(binary)
    n = B.shape[0]
    adj = [[bool(B[a, b]) and a != b for b in range(n)] for a in range(n)]
    nodes = list(range(n))
    d = _floyd_warshall(adj, nodes)

    edges = sum(adj[a][b] for a in range(n) for b in range(a + 1, n))
    deg = [sum(adj[a]) for a in range(n)]
    src = B if pre_threshold is None else np.asarray(pre_threshold)
    off = [src[a, b] for a in range(n) for b in range(n) if a != b]

    comps = []
    seen = set()
    for a in range(n):
        if a not in seen:
            comp = sorted(b for b in range(n) if d[a][b] < math.inf)
            seen.update(comp)
            comps.append(comp)
    # largest, ties to the component holding the lowest vertex
    main = max(comps, key=lambda c: (len(c), -c[0]))

    finite = [d[a][b] for a in range(n) for b in range(n) if a != b and d[a][b] < math.inf]
    ecc = [max(d[a][b] for b in main) for a in main]

    local = []
    for v in range(n):
        nb = [u for u in range(n) if adj[v][u]]
        if len(nb) < 2:
            local.append(0.0)
            continue
        dn = _floyd_warshall(adj, nb)
        k = len(nb)
        local.append(sum(1 / dn[a][b] for a in range(k) for b in range(k)
                         if a != b and dn[a][b] < math.inf) / (k * (k - 1)))

    return {
        "density": edges / (n * (n - 1) / 2),
        "local_efficiency": sum(local) / n,
        "n_components": len(comps),
        "largest_component_size": len(main),
        "avg_degree": sum(deg) / n,
        "avg_weight": sum(off) / len(off),
        "n_self_loops": sum(1 for a in range(n) if B[a, a] != 0),
        "char_path_length": sum(finite) / len(finite) if finite else 0.0,
        "mean_eccentricity": sum(ecc) / len(ecc),
        "radius": min(ecc),
        "diameter": max(ecc),
    }


def auc_pairs(scores, labels):
    """Mann-Whitney AUC by counting every positive/negative pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = 0.0
    for p in pos:
        for q in neg:
            credit += 1.0 if p > q else 0.5 if p == q else 0.0
    return credit / (len(pos) * len(neg))


def dft_bin_energies(row):
    """|DFT|^2 for each one-sided bin, via an explicit DFT matrix."""
    T = len(row)
    n = np.arange(T)
    F = np.exp(-2j * np.pi * np.outer(n, n) / T)
    return np.abs(F @ np.asarray(row, dtype=float))[: T // 2 + 1] ** 2
