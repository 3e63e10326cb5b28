"""Phylometrics over ancestor-list phylogeny tables.

Branch lengths are origin-time differences.  Leaves are rows with no
children.  Every metric here runs in linear time after one topological pass:

* sum branch length
* mean and sum pairwise (patristic) distance, via per-edge leaf counts:
  an edge with ``L`` leaves below it lies on ``L * (n - L)`` leaf paths
* mean fair-proportion evolutionary distinctiveness
* Colless-like index: sum over multifurcating nodes of the pairwise
  absolute differences of child-subtree leaf counts
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from math import comb

import numpy as np

from .exceptions import DataError
from .trie import PhylogenyTable

METRIC_NAMES = (
    "colless_like",
    "mean_evolutionary_distinctiveness",
    "mean_pairwise_distance",
    "sum_pairwise_distance",
    "sum_branch_length",
)


@dataclass
class TreeArrays:
    """Row-indexed parent pointers in root-first topological order."""

    parent: np.ndarray
    order: np.ndarray
    time: np.ndarray
    leaves_below: np.ndarray
    n_children: np.ndarray

    @property
    def is_leaf(self) -> np.ndarray:
        return self.n_children == 0

    @property
    def edge_length(self) -> np.ndarray:
        length = np.zeros(len(self.parent))
        has_parent = self.parent >= 0
        length[has_parent] = self.time[has_parent] - self.time[self.parent[has_parent]]
        return length


def tree_arrays(table: PhylogenyTable) -> TreeArrays:
    n = len(table)
    if n == 0:
        raise DataError("empty phylogeny")
    index = {}
    for k, i in enumerate(table.id.tolist()):
        if i in index:
            raise DataError(f"duplicate id {i}")
        index[i] = k
    parent = np.full(n, -1, dtype=np.int64)
    for k, a in enumerate(table.ancestor_id.tolist()):
        if a >= 0:
            if a not in index:
                raise DataError(f"ancestor id {a} not present")
            parent[k] = index[a]
    roots = np.flatnonzero(parent < 0)
    if len(roots) != 1:
        raise DataError(f"expected exactly one root, found {len(roots)}")

    children = [[] for _ in range(n)]
    for k, p in enumerate(parent.tolist()):
        if p >= 0:
            children[p].append(k)
    order = []
    stack = [int(roots[0])]
    while stack:
        k = stack.pop()
        order.append(k)
        stack.extend(children[k])
    if len(order) != n:
        raise DataError("ancestor graph is not a tree (cycle or disconnected rows)")
    order = np.array(order, dtype=np.int64)

    n_children = np.array([len(c) for c in children], dtype=np.int64)
    leaves_below = (n_children == 0).astype(np.int64)
    for k in order[::-1]:
        if parent[k] >= 0:
            leaves_below[parent[k]] += leaves_below[k]
    time = np.asarray(table.origin_time, dtype=np.float64)
    if np.any(time[order[1:]] < time[parent[order[1:]]]):
        raise DataError("origin times decrease along an edge")
    return TreeArrays(parent, order, time, leaves_below, n_children)


def _arrays(table) -> TreeArrays:
    return table if isinstance(table, TreeArrays) else tree_arrays(table)


def sum_branch_length(table) -> float:
    return float(_arrays(table).edge_length.sum())


def pairwise_distances(table) -> tuple[float, float]:
    """(mean, sum) of patristic distance over unordered leaf pairs."""
    t = _arrays(table)
    n = int(t.is_leaf.sum())
    if n < 2:
        raise DataError("pairwise distances need at least two leaves")
    L = t.leaves_below.astype(np.float64)
    total = float(np.sum(t.edge_length * L * (n - L)))
    return total / comb(n, 2), total


def evolutionary_distinctiveness(table) -> np.ndarray:
    """Fair-proportion ED for each leaf, in row order of the leaves."""
    t = _arrays(table)
    share = np.zeros(len(t.parent))
    nonzero = t.leaves_below > 0
    share[nonzero] = t.edge_length[nonzero] / t.leaves_below[nonzero]
    ed = np.zeros(len(t.parent))
    for k in t.order[1:]:
        ed[k] = ed[t.parent[k]] + share[k]
    return ed[t.is_leaf]


def mean_evolutionary_distinctiveness(table) -> float:
    return float(evolutionary_distinctiveness(table).mean())


def colless_like_index(table) -> float:
    t = _arrays(table)
    children = {}
    for k, p in enumerate(t.parent.tolist()):
        if p >= 0:
            children.setdefault(p, []).append(t.leaves_below[k])
    total = 0
    for counts in children.values():
        k = len(counts)
        if k < 2:
            continue  # unifurcation
        s = np.sort(np.asarray(counts, dtype=np.int64))
        total += int(np.sum(s * (2 * np.arange(k) - k + 1)))
    return float(total)


@dataclass
class MetricsReport:
    colless_like: float
    mean_evolutionary_distinctiveness: float
    mean_pairwise_distance: float
    sum_pairwise_distance: float
    sum_branch_length: float
    leaf_count: int
    node_count: int
    mode: str = "exact"

    def as_dict(self) -> dict:
        return asdict(self)

    def as_vector(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in METRIC_NAMES])


def compute_report(table) -> MetricsReport:
    t = _arrays(table)
    n = int(t.is_leaf.sum())
    if n >= 2:
        mpd, spd = pairwise_distances(t)
    else:
        mpd = spd = 0.0
    return MetricsReport(
        colless_like=colless_like_index(t),
        mean_evolutionary_distinctiveness=mean_evolutionary_distinctiveness(t),
        mean_pairwise_distance=mpd,
        sum_pairwise_distance=spd,
        sum_branch_length=sum_branch_length(t),
        leaf_count=n,
        node_count=len(t.parent),
    )
