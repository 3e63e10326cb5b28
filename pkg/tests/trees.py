"""Fixture trees and a path-walking pairwise-distance oracle."""
from itertools import combinations

import numpy as np

from islandstrat.trie import PhylogenyTable


def table(edges, times, labels=None):
    """``edges`` maps child id -> parent id; the root is the id with no entry."""
    ids = sorted(times)
    anc = [edges.get(i, -1) for i in ids]
    if labels is None:
        parents = set(edges.values())
        labels = {i: f"n{i}" for i in ids if i not in parents}
    return PhylogenyTable(ids, anc, [times[i] for i in ids], [labels.get(i) for i in ids])


CHERRY = table({1: 0, 2: 0}, {0: 0, 1: 2, 2: 2})
CHAIN = table({1: 0, 2: 1}, {0: 0, 1: 3, 2: 5})
STAR5 = table({i: 0 for i in range(1, 6)}, {0: 0, **{i: 1 for i in range(1, 6)}})
BALANCED = table(
    {1: 0, 2: 0, 3: 1, 4: 1, 5: 2, 6: 2}, {0: 0, 1: 1, 2: 1, 3: 2, 4: 2, 5: 2, 6: 2}
)
# ((a,b),c) with X at 1 and leaves at 2
SMALL_CATERPILLAR = table({1: 0, 2: 1, 3: 1, 4: 0}, {0: 0, 1: 1, 2: 2, 3: 2, 4: 2})
# root(0)->A(1)->B(2); one leaf at 3 off each of root, A, and two off B
CATERPILLAR = table(
    {1: 0, 2: 1, 3: 0, 4: 1, 5: 2, 6: 2},
    {0: 0, 1: 1, 2: 2, 3: 3, 4: 3, 5: 3, 6: 3},
)

# name -> (table, expected metric values)
FIXTURES = {
    "cherry": (
        CHERRY,
        dict(
            colless_like=0,
            mean_evolutionary_distinctiveness=2,
            mean_pairwise_distance=4,
            sum_pairwise_distance=4,
            sum_branch_length=4,
        ),
    ),
    "chain": (CHAIN, dict(sum_branch_length=5, mean_evolutionary_distinctiveness=5)),
    "star": (
        STAR5,
        dict(colless_like=0, sum_pairwise_distance=2 * 10, mean_pairwise_distance=2),
    ),
    "caterpillar": (
        CATERPILLAR,
        dict(colless_like=3, sum_branch_length=9),
    ),
    "small_caterpillar": (SMALL_CATERPILLAR, dict(mean_evolutionary_distinctiveness=5 / 3)),
    "balanced": (
        BALANCED,
        dict(colless_like=0, sum_pairwise_distance=20, mean_pairwise_distance=20 / 6),
    ),
}


def random_tree(rng, max_leaves=12):
    """Random rooted tree with integer or real origin times, 2..max_leaves leaves."""
    n_leaves = int(rng.integers(2, max_leaves + 1))
    parent = {}
    time = {0: 0.0}
    next_id = 1
    leaves = 0
    nodes = [0]
    while leaves < n_leaves:
        p = nodes[int(rng.integers(len(nodes)))]
        parent[next_id] = p
        time[next_id] = time[p] + float(rng.choice([0, rng.integers(1, 10), rng.random() * 5]))
        nodes.append(next_id)
        next_id += 1
        leaves = len(set(nodes) - set(parent.values()))
    return table(parent, time)


def brute_force_pairwise(t: PhylogenyTable):
    ids = [int(i) for i in t.id]
    anc = {int(i): int(a) for i, a in zip(t.id, t.ancestor_id)}
    when = {int(i): float(x) for i, x in zip(t.id, t.origin_time)}
    parents = {a for a in anc.values() if a >= 0}
    leaves = [i for i in ids if i not in parents]

    def path(i):
        out = [i]
        while anc[out[-1]] >= 0:
            out.append(anc[out[-1]])
        return out

    total = 0.0
    for a, b in combinations(leaves, 2):
        pa, pb = path(a), set(path(b))
        mrca = next(x for x in pa if x in pb)
        total += (when[a] - when[mrca]) + (when[b] - when[mrca])
    n_pairs = len(leaves) * (len(leaves) - 1) // 2
    return total / n_pairs, total


def brute_force_check(n_trees=100, seed=0, rtol=1e-9):
    """Count of random trees on which the fast pairwise sums disagree."""
    from islandstrat.metrics import pairwise_distances

    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n_trees):
        t = random_tree(rng)
        fast = pairwise_distances(t)
        slow = brute_force_pairwise(t)
        if not np.allclose(fast, slow, rtol=rtol, atol=1e-12):
            bad += 1
    return bad


def fixture_mismatches(rtol=1e-9):
    from islandstrat.metrics import compute_report

    out = []
    for name, (t, expected) in FIXTURES.items():
        report = compute_report(t).as_dict()
        for metric, value in expected.items():
            if not np.isclose(report[metric], value, rtol=rtol, atol=0):
                out.append(f"{name}.{metric}: {report[metric]} != {value}")
    return out
