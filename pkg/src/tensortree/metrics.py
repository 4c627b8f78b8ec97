"""Robinson-Foulds distance, leaf bipartitions, and Newick serialization."""

from __future__ import annotations

from typing import FrozenSet

from .builder import choose_balanced_root
from .exceptions import ModelError, ParseError
from .model import LatentTree

_FORBIDDEN = set("(),;: \t\n")


def bipartitions(tree: LatentTree) -> frozenset:
    """Canonical nontrivial leaf splits, one per internal (hidden-hidden) edge.

    Each split is stored as the frozenset of leaf names on the side *not*
    containing the anchor leaf (the lexicographically smallest name).
    """
    names = sorted(tree.leaf_names.values())
    if len(names) != len(set(names)):
        raise ModelError("leaf names must be unique")
    anchor = names[0]
    out = set()
    for u, v in tree.edges():
        if tree.is_leaf(u) or tree.is_leaf(v):
            continue
        side = frozenset(tree.leaf_names[x] for x in tree.leaves_in(tree.component(u, v)))
        if anchor in side:
            side = frozenset(set(names) - side)
        if len(side) >= 2 and len(side) <= len(names) - 2:
            out.add(side)
    return frozenset(out)


def robinson_foulds(t1: LatentTree, t2: LatentTree) -> int:
    """Number of leaf splits present in exactly one of the two trees."""
    if set(t1.leaf_names.values()) != set(t2.leaf_names.values()):
        raise ValueError("trees have different leaf label sets")
    s1, s2 = bipartitions(t1), bipartitions(t2)
    return len(s1 - s2) + len(s2 - s1)


# ---------------------------------------------------------------------------
# Newick
# ---------------------------------------------------------------------------


def _min_leaf_below(tree: LatentTree, node: int, parent: int) -> str:
    if tree.is_leaf(node):
        return tree.leaf_names[node]
    return min(_min_leaf_below(tree, nb, node)
               for nb in tree.neighbors(node) if nb != parent)


def to_newick(tree: LatentTree) -> str:
    """Serialize rooted at the most balanced hidden node; hidden nodes are
    labeled H1, H2, ... in emission order and children are ordered by the
    smallest leaf label beneath them."""
    for name in tree.leaf_names.values():
        if set(name) & _FORBIDDEN:
            raise ValueError(f"leaf name {name!r} contains reserved characters")
    root = choose_balanced_root(tree)
    counter = [0]

    def emit(node, parent):
        if tree.is_leaf(node):
            return tree.leaf_names[node]
        children = sorted((nb for nb in tree.neighbors(node) if nb != parent),
                          key=lambda nb: _min_leaf_below(tree, nb, node))
        inner = ",".join(emit(c, node) for c in children)
        counter[0] += 1
        return f"({inner})H{counter[0]}"

    return emit(root, None) + ";"


class _NewickParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message):
        raise ParseError(message, position=self.pos)

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self):
        node = self.subtree()
        if self.peek() != ";":
            self.error("expected ';' at end of tree")
        self.pos += 1
        if self.text[self.pos:].strip():
            self.error("trailing text after ';'")
        return node

    def subtree(self):
        if self.peek() == "(":
            self.pos += 1
            children = [self.subtree()]
            while self.peek() == ",":
                self.pos += 1
                children.append(self.subtree())
            if self.peek() != ")":
                self.error("expected ')' or ','")
            self.pos += 1
            label = self.label(optional=True)
            return (label, children)
        name = self.label(optional=False)
        return (name, [])

    def label(self, optional):
        start = self.pos
        while self.peek() and self.peek() not in "(),;:":
            self.pos += 1
        text = self.text[start:self.pos].strip()
        if self.peek() == ":":  # branch length: parse and discard
            self.pos += 1
            bstart = self.pos
            while self.peek() and self.peek() not in "(),;":
                self.pos += 1
            try:
                float(self.text[bstart:self.pos])
            except ValueError:
                self.error("malformed branch length")
        if not text and not optional:
            self.error("expected a leaf name")
        return text or None


def from_newick(text: str) -> LatentTree:
    """Parse a single Newick tree into an unrooted latent tree.

    A degree-2 root (rooted binary convention) is contracted away.  Hidden
    nodes of any other degree than 3 are rejected.
    """
    root = _NewickParser(text.strip()).parse()

    leaf_labels = []

    def collect(node):
        label, children = node
        if not children:
            leaf_labels.append(label)
        for c in children:
            collect(c)

    collect(root)
    if len(leaf_labels) != len(set(leaf_labels)):
        raise ParseError("duplicate leaf names")
    ids = {name: i for i, name in enumerate(sorted(leaf_labels))}
    adj: dict[int, list[int]] = {}
    next_hidden = [len(leaf_labels)]

    def build(node):
        label, children = node
        if not children:
            nid = ids[label]
        else:
            nid = next_hidden[0]
            next_hidden[0] += 1
        adj.setdefault(nid, [])
        for c in children:
            cid = build(c)
            adj[nid].append(cid)
            adj[cid].append(nid)
        return nid

    root_id = build(root)
    if len(adj[root_id]) == 2:  # contract a rooted-style degree-2 root
        a, b = adj[root_id]
        adj[a] = [x if x != root_id else b for x in adj[a]]
        adj[b] = [x if x != root_id else a for x in adj[b]]
        del adj[root_id]
    leaf_names = {i: name for name, i in ids.items()}
    try:
        return LatentTree(adj, leaf_names)
    except ModelError as exc:
        raise ParseError(f"invalid tree structure: {exc}") from exc
