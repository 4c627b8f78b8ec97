"""Neighbor-joining baseline with the determinant-based additive distance.

The distance between two discrete variables is
``d_ij = 0.5*log det diag(P_i) - log|det P_ij| + 0.5*log det diag(P_j)``.
It is additive along the tree when hidden and observed cardinalities match;
a singular pairwise table makes it undefined, which is recorded as +inf and
replaced by a large finite sentinel inside the joining loop.
"""

from __future__ import annotations

import math

import numpy as np

from .model import LatentTree

# Stand-in for an infinite distance; far above any finite value at n <= 20.
INFINITE_SENTINEL = 1e12


def additive_distance(p_ij: np.ndarray, p_i: np.ndarray, p_j: np.ndarray) -> float:
    """Determinant-based distance of two variables; +inf if the joint table is
    singular."""
    p_ij = np.asarray(p_ij, dtype=float)
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    if p_ij.ndim != 2 or p_ij.shape[0] != p_i.shape[0] or p_ij.shape[1] != p_j.shape[0]:
        raise ValueError("table and marginal shapes are inconsistent")
    if (np.max(np.abs(p_ij.sum(axis=1) - p_i)) > 1e-9
            or np.max(np.abs(p_ij.sum(axis=0) - p_j)) > 1e-9):
        raise ValueError("pairwise table margins do not match the marginals")
    sign, logdet = np.linalg.slogdet(p_ij)
    if sign == 0 or not np.isfinite(logdet):
        return math.inf
    return float(0.5 * np.sum(np.log(p_i)) + 0.5 * np.sum(np.log(p_j)) - logdet)


def distance_matrix(pair_tables, marginals) -> np.ndarray:
    """Symmetric distance matrix from per-pair tables and per-variable marginals.

    ``pair_tables[(i, j)]`` with i < j holds P(X_i, X_j); singular tables give
    +inf entries.
    """
    d = len(marginals)
    out = np.zeros((d, d))
    for (i, j), table in pair_tables.items():
        out[i, j] = out[j, i] = additive_distance(table, marginals[i], marginals[j])
    return out


def neighbor_join(dist: np.ndarray, names) -> LatentTree:
    """Standard neighbor joining on a symmetric distance matrix; returns the
    unrooted binary topology only (branch lengths are discarded).

    Ties in the joining criterion break toward the lowest index pair, making
    the output deterministic.  Non-finite entries are replaced by a large
    finite sentinel.
    """
    dist = np.array(dist, dtype=float)
    d = dist.shape[0]
    if dist.shape != (d, d) or d != len(names):
        raise ValueError("distance matrix and names are inconsistent")
    if np.any(np.isnan(dist)):
        raise ValueError("distance matrix contains NaN")
    dist = np.where(np.isinf(dist), INFINITE_SENTINEL, dist)
    if np.max(np.abs(dist - dist.T)) > 1e-9:
        raise ValueError("distance matrix is not symmetric")
    if np.any(np.diag(dist) != 0.0):
        raise ValueError("distance matrix diagonal must be zero")
    if d < 4:
        raise ValueError(f"need at least 4 variables, got {d}")

    active = list(range(d))  # node ids of current clusters
    adj: dict[int, list[int]] = {i: [] for i in range(d)}
    next_id = d
    while len(active) > 3:
        n_act = len(active)
        sub = dist[np.ix_(active, active)]
        r = sub.sum(axis=1)
        q = (n_act - 2) * sub - r[:, None] - r[None, :]
        np.fill_diagonal(q, np.inf)
        # Lowest-index tie break on the (i, j) pair, i < j.
        flat = np.round(q, 12)
        best = None
        for a in range(n_act):
            for b in range(a + 1, n_act):
                if best is None or flat[a, b] < flat[best]:
                    best = (a, b)
        a, b = best
        h = next_id
        next_id += 1
        adj[h] = [active[a], active[b]]
        adj[active[a]].append(h)
        adj[active[b]].append(h)
        # Distance from the new cluster to every other active cluster.
        grown = np.pad(dist, ((0, 1), (0, 1)))
        for c in range(n_act):
            if c in (a, b):
                continue
            val = 0.5 * (sub[a, c] + sub[b, c] - sub[a, b])
            grown[h, active[c]] = grown[active[c], h] = val
        dist = grown
        keep = [x for idx, x in enumerate(active) if idx not in (a, b)]
        active = keep + [h]
    # Join the last three clusters through one final hidden node.
    h = next_id
    adj[h] = list(active)
    for x in active:
        adj[x].append(h)
    leaf_names = {i: str(names[i]) for i in range(d)}
    return LatentTree(adj, leaf_names)
