"""Compiled inner loop for one PE generation.

Random draws are made on the Python side from the PE's numpy ``Generator``
(three bulk calls per generation) and handed in as arrays.
"""
import numpy as np
from numba import njit

POLICY_STEADY = 0
POLICY_RING = 1


@njit(cache=True)
def site_for(policy, num_sites, time):
    """Storage site for the deposition at ``time``; -1 means skip."""
    if policy == POLICY_RING:
        return time % num_sites
    if time >= num_sites:
        q = time // num_sites
        half = 1
        while half * 2 <= q:
            half *= 2
        if time % (2 * half) != 0:
            return -1
    while time >= num_sites:
        q = time // num_sites
        half = 1
        while half * 2 <= q:
            half *= 2
        k = (time - num_sites * half) // (2 * half)
        time = half * (2 * k + 1)
    return time


@njit(cache=True)
def generation(
    uniforms, normals, diffs, fitness, depth, sites, k, p_del, p_ben, sigma_del, sigma_ben, policy
):
    """One generation from pre-drawn randomness.

    ``uniforms`` holds ``n * (k + 1)`` values in [0, 1): ``k`` per slot for
    tournament sampling plus one mutation draw; ``normals`` and ``diffs``
    hold one value per slot.
    """
    n = fitness.shape[0]
    num_sites = sites.shape[1]
    parents = np.empty(n, dtype=np.int64)
    new_fitness = np.empty(n, dtype=np.float64)
    new_depth = np.empty(n, dtype=np.int64)
    new_sites = np.empty_like(sites)
    scratch = np.arange(n)
    pos = 0
    for slot in range(n):
        # partial Fisher-Yates: k distinct contestants in random order, so
        # keeping the first maximum breaks ties uniformly
        best = -1
        for j in range(k):
            r = j + min(int(uniforms[pos] * (n - j)), n - j - 1)
            pos += 1
            tmp = scratch[j]
            scratch[j] = scratch[r]
            scratch[r] = tmp
            c = scratch[j]
            if best < 0 or fitness[c] > fitness[best]:
                best = c
        parents[slot] = best

        u = uniforms[pos]
        pos += 1
        mag = abs(normals[slot])
        f = fitness[best]
        if u < p_del:
            f -= sigma_del * mag
        elif u < p_del + p_ben:
            f += sigma_ben * mag
        new_fitness[slot] = f

        d = depth[best]
        new_sites[slot, :] = sites[best, :]
        site = site_for(policy, num_sites, d)
        if site >= 0:
            new_sites[slot, site] = diffs[slot]
        new_depth[slot] = d + 1
    return parents, new_fitness, new_depth, new_sites
