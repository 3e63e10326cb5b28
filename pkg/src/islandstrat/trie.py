"""Trie-based phylogeny reconstruction from surface annotations.

Each annotation is read as its sequence of (rank, differentia) alleles in
ascending rank order.  Annotations are inserted one at a time, shallowest
lineage first; an annotation descends to the deepest existing node consistent
with its alleles, then unrolls its remaining alleles as a fresh
unifurcating branch ending in a leaf.  Trie ranks the annotation no longer
holds (evicted from its surface) neither confirm nor refute a match.  The
root stands for the universal common ancestor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .surface import Allele, SurfaceAnnotation, extract_alleles


class TrieInnerNode:
    __slots__ = ("rank", "differentia", "parent", "children", "_by_allele", "origin_time")

    def __init__(self, rank=None, differentia=None, parent=None):
        self.rank = rank
        self.differentia = differentia
        self.parent = parent
        self.children = []  # inner and leaf nodes, insertion order
        self._by_allele = {}
        self.origin_time = None

    @property
    def is_root(self) -> bool:
        return self.rank is None

    def child_for(self, allele) -> "TrieInnerNode | None":
        return self._by_allele.get((allele[0], allele[1]))

    def add_inner(self, allele) -> "TrieInnerNode":
        node = TrieInnerNode(int(allele[0]), int(allele[1]), self)
        self.children.append(node)
        self._by_allele[(node.rank, node.differentia)] = node
        return node

    def add_leaf(self, label, depth: int) -> "TrieLeafNode":
        leaf = TrieLeafNode(label, depth, self)
        self.children.append(leaf)
        return leaf

    def __repr__(self):
        if self.is_root:
            return f"TrieInnerNode(ROOT, {len(self.children)} children)"
        return f"TrieInnerNode(rank={self.rank}, differentia={self.differentia})"


class TrieLeafNode:
    __slots__ = ("label", "depth", "parent", "origin_time")

    def __init__(self, label, depth, parent):
        self.label = label
        self.depth = int(depth)
        self.parent = parent
        self.origin_time = None

    children = ()

    def __repr__(self):
        return f"TrieLeafNode({self.label!r}, depth={self.depth})"


def _deepest_congruous(root: TrieInnerNode, alleles: Sequence, depth: int):
    """Deepest inner node whose root path is consistent with ``alleles``.

    A path node is consistent if the annotation holds the same differentia
    at that rank, or if the annotation holds nothing at that rank (evicted
    from its surface) and the rank predates the annotation's depth.  Returns
    the node and the index of the first allele ranked after it.
    """
    best, best_i, best_rank = root, 0, -1
    stack = [(root, 0)]
    while stack:
        node, i = stack.pop()
        for child in reversed(node.children):
            if isinstance(child, TrieLeafNode) or child.rank >= depth:
                continue
            j = i
            while j < len(alleles) and alleles[j][0] < child.rank:
                j += 1
            if j < len(alleles) and alleles[j][0] == child.rank:
                if alleles[j][1] != child.differentia:
                    continue
                j += 1
            if child.rank > best_rank:
                best, best_i, best_rank = child, j, child.rank
            stack.append((child, j))
    while best_i < len(alleles) and alleles[best_i][0] <= best_rank:
        best_i += 1
    return best, best_i


def insert_taxon(
    root: TrieInnerNode,
    alleles: Sequence,
    label,
    depth: int | None = None,
    *,
    skip_missing_ranks: bool = True,
):
    """Attach ``label`` below the deepest trie node congruous with ``alleles``.

    Alleles ranked after that node are unrolled as a new unifurcating chain
    ending in the leaf.  With ``skip_missing_ranks=False`` descent only
    follows children whose (rank, differentia) equals the next allele, so a
    trie rank the annotation no longer holds ends the descent.

    ``depth`` is the source annotation's depth; it defaults to one past the
    last allele rank.
    """
    prev = -1
    for allele in alleles:
        if allele[0] <= prev:
            raise ValueError("allele ranks must be strictly ascending")
        prev = allele[0]
    if depth is None:
        depth = prev + 1

    if skip_missing_ranks:
        node, i = _deepest_congruous(root, alleles, depth)
    else:
        node, i = root, 0
        while i < len(alleles):
            child = node.child_for(alleles[i])
            if child is None:
                break
            node = child
            i += 1
    for allele in alleles[i:]:
        node = node.add_inner(allele)
    return node.add_leaf(label, depth)


def build_trie_from_alleles(
    allele_lists: Sequence[Sequence],
    depths: Sequence[int],
    labels: Sequence,
    *,
    skip_missing_ranks: bool = True,
) -> TrieInnerNode:
    if not (len(allele_lists) == len(depths) == len(labels)):
        raise ValueError("alleles, depths and labels must have equal length")
    root = TrieInnerNode()
    for i in sorted(range(len(labels)), key=lambda i: depths[i]):  # stable
        insert_taxon(
            root, allele_lists[i], labels[i], depths[i], skip_missing_ranks=skip_missing_ranks
        )
    return root


def build_trie_from_artifacts(
    annotations: Sequence[SurfaceAnnotation], labels: Sequence, *, skip_missing_ranks: bool = True
) -> TrieInnerNode:
    if len(annotations) != len(labels):
        raise ValueError(
            f"got {len(annotations)} annotations but {len(labels)} labels"
        )
    if not annotations:
        raise ValueError("need at least one annotation")
    first = annotations[0]
    shape = (first.policy, first.num_sites, first.differentia_width)
    for a in annotations:
        if (a.policy, a.num_sites, a.differentia_width) != shape:
            raise ValueError("annotations use heterogeneous surface configurations")
    return build_trie_from_alleles(
        [extract_alleles(a) for a in annotations],
        [a.depth for a in annotations],
        labels,
        skip_missing_ranks=skip_missing_ranks,
    )


def iter_nodes(root: TrieInnerNode):
    """Pre-order traversal, children in insertion order."""
    stack = [root]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def assign_origin_times_naive(root: TrieInnerNode) -> TrieInnerNode:
    """Inner nodes get their allele rank (root 0); leaves their depth."""
    for node in iter_nodes(root):
        if isinstance(node, TrieLeafNode):
            node.origin_time = node.depth
        elif node.is_root:
            node.origin_time = 0
        else:
            node.origin_time = node.rank
    return root


@dataclass
class PhylogenyTable:
    """Flat ancestor-list phylogeny; ``ancestor_id`` is -1 for the root."""

    id: np.ndarray
    ancestor_id: np.ndarray
    origin_time: np.ndarray
    taxon_label: list

    def __post_init__(self):
        self.id = np.asarray(self.id, dtype=np.int64)
        self.ancestor_id = np.asarray(self.ancestor_id, dtype=np.int64)
        self.origin_time = np.asarray(self.origin_time)
        self.taxon_label = list(self.taxon_label)
        n = len(self.id)
        if not (len(self.ancestor_id) == len(self.origin_time) == len(self.taxon_label) == n):
            raise ValueError("phylogeny columns have different lengths")

    def __len__(self):
        return len(self.id)

    def __eq__(self, other):
        if not isinstance(other, PhylogenyTable):
            return NotImplemented
        return (
            np.array_equal(self.id, other.id)
            and np.array_equal(self.ancestor_id, other.ancestor_id)
            and np.array_equal(self.origin_time, other.origin_time)
            and self.taxon_label == other.taxon_label
        )

    def leaf_labels(self) -> list:
        has_child = np.zeros(len(self), dtype=bool)
        index = {int(i): k for k, i in enumerate(self.id)}
        for a in self.ancestor_id:
            if a >= 0:
                has_child[index[int(a)]] = True
        return [self.taxon_label[k] for k in np.flatnonzero(~has_child)]


def trie_to_table(root: TrieInnerNode) -> PhylogenyTable:
    ids, ancestors, times, labels = [], [], [], []
    node_id = {}
    for node in iter_nodes(root):
        if node.origin_time is None:
            raise ValueError("assign origin times before converting the trie")
        nid = len(ids)
        node_id[id(node)] = nid
        ids.append(nid)
        ancestors.append(-1 if node.parent is None else node_id[id(node.parent)])
        times.append(node.origin_time)
        labels.append(node.label if isinstance(node, TrieLeafNode) else None)
    return PhylogenyTable(ids, ancestors, np.asarray(times, dtype=np.int64), labels)


def reconstruct(annotations, labels) -> PhylogenyTable:
    """Build the trie, assign naive origin times and flatten to a table."""
    return trie_to_table(assign_origin_times_naive(build_trie_from_artifacts(annotations, labels)))


def _ancestry(table: PhylogenyTable):
    index = {int(i): k for k, i in enumerate(table.id)}
    parent = np.array([index[int(a)] if a >= 0 else -1 for a in table.ancestor_id])
    return index, parent


def _mrca_row(parent: np.ndarray, a: int, b: int) -> int:
    seen = set()
    while a >= 0:
        seen.add(a)
        a = parent[a]
    while b not in seen:
        b = parent[b]
    return b


def pedigree_mrca_generation(parent_of: dict, a: int, b: int) -> int:
    """Birth generation of the youngest shared ancestor, clamped at 0.

    ``parent_of`` maps child id -> (parent id, birth generation).  Founders
    have no entry; lineages from different founders meet at the universal
    ancestor, which like a founder is reported as generation 0.
    """
    seen = {}
    x = a
    while x in parent_of:
        seen[x] = parent_of[x][1]
        x = parent_of[x][0]
    seen.setdefault(x, -1)  # founder
    x = b
    while x not in seen:
        if x not in parent_of:
            return 0
        x = parent_of[x][0]
    return max(0, seen[x] if x in parent_of else -1)


@dataclass
class ReconstructionError:
    errors: np.ndarray  # reconstructed - true, one per sampled pair
    tolerances: tuple

    @property
    def n_pairs(self) -> int:
        return len(self.errors)

    @property
    def mean(self) -> float:
        return float(self.errors.mean()) if len(self.errors) else 0.0

    @property
    def median_absolute(self) -> float:
        return float(np.median(np.abs(self.errors))) if len(self.errors) else 0.0

    def fraction_within(self, tolerance: float) -> float:
        if not len(self.errors):
            return 1.0
        return float(np.mean(np.abs(self.errors) <= tolerance))

    def summary(self) -> dict:
        return {
            "n_pairs": self.n_pairs,
            "mean_error": self.mean,
            "median_absolute_error": self.median_absolute,
            "max_absolute_error": float(np.abs(self.errors).max()) if len(self.errors) else 0.0,
            "fraction_within": {str(t): self.fraction_within(t) for t in self.tolerances},
        }


def compare_to_pedigree(
    table: PhylogenyTable,
    pedigree: Iterable,
    pair_sample: int | None,
    rng: np.random.Generator | None = None,
    label_to_lineage: dict | None = None,
    tolerances=(0, 1, 10, 100),
) -> ReconstructionError:
    """Signed MRCA-generation error of a reconstruction against exact pedigree.

    ``pedigree`` holds records with ``child_id``, ``parent_id`` and
    ``birth_generation``.  Leaf labels map to lineage ids through
    ``label_to_lineage`` or, by default, ``int(label)``.  ``pair_sample``
    of ``None`` compares every leaf pair.
    """
    parent_of = {r.child_id: (r.parent_id, r.birth_generation) for r in pedigree}
    _, parent = _ancestry(table)
    has_child = np.zeros(len(table), dtype=bool)
    has_child[parent[parent >= 0]] = True
    leaves = np.flatnonzero(~has_child)

    lineage = []
    for k in leaves:
        label = table.taxon_label[k]
        try:
            lineage.append(
                label_to_lineage[label] if label_to_lineage is not None else int(label)
            )
        except (KeyError, TypeError, ValueError):
            raise ValueError(f"leaf label {label!r} does not map to a lineage id") from None

    n = len(leaves)
    if pair_sample is None:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        rng = rng if rng is not None else np.random.default_rng()
        pairs = []
        for _ in range(pair_sample):
            i, j = rng.choice(n, size=2, replace=False)
            pairs.append((int(i), int(j)))

    times = table.origin_time
    errors = np.empty(len(pairs))
    for p, (i, j) in enumerate(pairs):
        reconstructed = times[_mrca_row(parent, leaves[i], leaves[j])]
        true = pedigree_mrca_generation(parent_of, lineage[i], lineage[j])
        errors[p] = reconstructed - true
    return ReconstructionError(errors, tuple(tolerances))


def to_newick(table: PhylogenyTable) -> str:
    """Newick string with branch lengths equal to origin-time differences."""
    index, parent = _ancestry(table)
    children = [[] for _ in range(len(table))]
    roots = []
    for k, p in enumerate(parent):
        (children[p] if p >= 0 else roots).append(k)
    if len(roots) != 1:
        raise ValueError("table must have exactly one root")
    times = table.origin_time

    def name(k):
        label = table.taxon_label[k]
        if label is None:
            return ""
        text = str(label)
        if any(c in text for c in " ,:;()[]'"):
            text = "'" + text.replace("'", "''") + "'"
        return text

    out = {}
    stack = [(roots[0], False)]
    while stack:
        k, done = stack.pop()
        if not done:
            stack.append((k, True))
            stack.extend((c, False) for c in reversed(children[k]))
            continue
        text = name(k)
        if children[k]:
            text = "(" + ",".join(out.pop(c) for c in children[k]) + ")" + text
        if parent[k] >= 0:
            text += f":{times[k] - times[parent[k]]}"
        out[k] = text
    return out[roots[0]] + ";"
