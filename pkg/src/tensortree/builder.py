"""Divide-and-conquer tree construction from a quartet resolver.

The builder starts from a single quartet and inserts the remaining leaves one
at a time.  For each insertion it narrows down the attachment edge by
repeatedly picking a hidden node that splits the candidate edges as evenly as
possible, testing which of the three directions the new leaf belongs to, and
recursing into that direction.  Each test removes at least half of the
candidate edges, so an insertion costs O(log d) resolver calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import LatentTree, quartet_tree
from .tensors import QuartetRelation


@dataclass
class BuildTrace:
    """Log of one build: every resolver verdict and per-insertion search depth."""

    verdicts: list = field(default_factory=list)
    insertion_depths: list = field(default_factory=list)

    @property
    def quartet_test_count(self) -> int:
        return len(self.verdicts)

    def record(self, quartet, relation) -> None:
        self.verdicts.append((tuple(quartet), QuartetRelation(relation)))


def _call_resolver(resolver, quartet, trace: BuildTrace) -> QuartetRelation:
    out = resolver(*quartet)
    rel = QuartetRelation(getattr(out, "relation", out))
    trace.record(quartet, rel)
    return rel


def choose_balanced_root(tree: LatentTree) -> int:
    """Hidden node minimizing the largest leaf count among its three branches;
    ties broken by lowest node id."""
    hidden = tree.hidden
    if not hidden:
        raise ValueError("tree has no hidden node")
    best, best_score = None, None
    for h in hidden:
        score = max(len(tree.leaves_in(comp)) for comp in tree.directions(h).values())
        if best_score is None or score < best_score:
            best, best_score = h, score
    return best


def insert_leaf(tree: LatentTree, sibling_edge: tuple[int, int], new_leaf: int,
                name: str | None = None) -> LatentTree:
    """Subdivide an edge with a fresh hidden node and hang the new leaf off it."""
    u, v = sibling_edge
    if not tree.has_edge(u, v):
        raise ValueError(f"edge {sibling_edge} not in tree")
    if new_leaf in tree.nodes():
        raise ValueError(f"node id {new_leaf} already present")
    fresh = max(max(tree.nodes()), new_leaf) + 1
    adj = {x: [y for y in tree.neighbors(x)] for x in tree.nodes()}
    adj[u].remove(v)
    adj[v].remove(u)
    adj[u].append(fresh)
    adj[v].append(fresh)
    adj[fresh] = [u, v, new_leaf]
    adj[new_leaf] = [fresh]
    names = dict(tree.leaf_names)
    names[new_leaf] = name if name is not None else f"X{new_leaf}"
    return LatentTree(adj, names)


def _remove_leaf(tree: LatentTree, leaf: int) -> LatentTree:
    """Inverse of :func:`insert_leaf`: drop a leaf and contract its hidden node."""
    (h,) = tree.neighbors(leaf)
    u, v = [x for x in tree.neighbors(h) if x != leaf]
    adj = {x: [y for y in tree.neighbors(x)] for x in tree.nodes()
           if x not in (leaf, h)}
    adj[u] = [x if x != h else v for x in adj[u]]
    adj[v] = [x if x != h else u for x in adj[v]]
    names = {k: s for k, s in tree.leaf_names.items() if k != leaf}
    return LatentTree(adj, names)


def _direction_edges(tree: LatentTree, center: int, neighbor: int) -> frozenset:
    comp = tree.component(neighbor, center)
    edges = {frozenset((center, neighbor))}
    for x in comp:
        for y in tree.neighbors(x):
            if y in comp:
                edges.add(frozenset((x, y)))
    return frozenset(edges)


def _locate_edge(tree: LatentTree, new_leaf: int, resolver, rng, trace: BuildTrace,
                 ) -> tuple[int, int]:
    """Find the attachment edge for a new leaf with O(log d) quartet tests."""
    candidates = {frozenset(e) for e in tree.edges()}
    depth = 0
    while len(candidates) > 1:
        # Hidden node whose three directions split the candidates most evenly.
        best, best_score = None, None
        for h in tree.hidden:
            per_dir = [len(candidates & _direction_edges(tree, h, nb))
                       for nb in tree.neighbors(h)]
            score = max(per_dir)
            if best_score is None or score < best_score:
                best, best_score = h, score
        reps = []
        dir_edge_sets = []
        for nb in tree.neighbors(best):
            comp = tree.component(nb, best)
            leaves = tree.leaves_in(comp)
            reps.append(leaves[rng.integers(len(leaves))])
            dir_edge_sets.append(candidates & _direction_edges(tree, best, nb))
        rel = _call_resolver(resolver, (new_leaf, *reps), trace)
        depth += 1
        candidates = dir_edge_sets[int(rel) - 1]
        if not candidates:
            # The test pointed at a direction already ruled out; fall back to
            # the boundary edge of that direction so the build can continue.
            candidates = {frozenset((best, tree.neighbors(best)[int(rel) - 1]))}
    trace.insertion_depths.append(depth)
    (edge,) = candidates
    return tuple(sorted(edge))


def build_tree(resolver: Callable, variables: Sequence[int], seed=0,
               names: dict | None = None, shuffle: bool = False,
               ) -> tuple[LatentTree, BuildTrace]:
    """Construct an unrooted latent tree over ``variables`` (leaf ids) using a
    quartet resolver.

    The resolver is called as ``resolver(a, b, c, d)`` with leaf ids and must
    return a :class:`QuartetRelation` (or a verdict carrying one).  Leaves are
    inserted in input order; ``shuffle`` applies a seeded permutation first.
    The seed also drives the random representative-leaf choices.
    """
    order = [int(v) for v in variables]
    if len(set(order)) != len(order):
        raise ValueError("variable ids must be distinct")
    if len(order) < 4:
        raise ValueError(f"need at least 4 variables, got {len(order)}")
    rng = np.random.default_rng(seed)
    if shuffle:
        rng.shuffle(order)
    if names is None:
        names = {v: f"X{v}" for v in order}
    trace = BuildTrace()
    first = order[:4]
    rel = _call_resolver(resolver, tuple(first), trace)
    trace.insertion_depths.append(1)
    tree = quartet_tree(first, rel, names=names, hidden_start=max(order) + 1)
    for x in order[4:]:
        edge = _locate_edge(tree, x, resolver, rng, trace)
        tree = insert_leaf(tree, edge, x, name=names[x])
    return tree, trace
