"""Exhaustive self-checks for the surface placement rules.

Used by the ``surface-check`` CLI subcommand and the acceptance tests.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .surface import (
    SurfacePolicy,
    assign_storage_site,
    iter_replay,
    lookup_resident_times,
    resident_ranks,
    retained_ranks,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    checked: int
    violations: int
    seconds: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (
            f"{status} {self.name}: {self.checked} checks, "
            f"{self.violations} violations, {self.seconds:.2f}s"
        )
        if self.detail:
            text += f" ({self.detail})"
        return text


def check_oracle_equivalence(policy, num_sites: int, max_time: int) -> CheckResult:
    """Compare placement and lookup with the brute-force replay, T = 0..max_time."""
    policy = SurfacePolicy.coerce(policy)
    start = time.perf_counter()
    checked = violations = 0
    first_bad = ""
    if lookup_resident_times(policy, num_sites, 0):
        violations += 1
        first_bad = "depth 0 not empty"
    for t, site, occupancy in iter_replay(policy, num_sites, max_time + 1):
        checked += 1
        ok = assign_storage_site(policy, num_sites, t) == site
        ok = ok and np.array_equal(resident_ranks(policy, num_sites, t + 1), occupancy)
        if not ok:
            violations += 1
            if not first_bad:
                first_bad = f"first mismatch at T={t}"
    # the list-returning public form on a sparse sample of depths
    for depth in np.unique(np.geomspace(1, max_time + 1, 64).astype(int)):
        expected = [
            (int(s), int(r))
            for s, r in enumerate(resident_ranks(policy, num_sites, int(depth)))
            if r >= 0
        ]
        if lookup_resident_times(policy, num_sites, int(depth)) != expected:
            violations += 1
    return CheckResult(
        f"oracle-equivalence {policy.name} S={num_sites} T<={max_time}",
        violations == 0,
        checked,
        violations,
        time.perf_counter() - start,
        first_bad,
    )


def max_gap_ratio(num_sites: int, depth: int) -> float:
    """Largest retention gap at ``depth`` divided by its allowed bound."""
    ranks = retained_ranks(SurfacePolicy.STEADY, num_sites, depth)
    points = np.concatenate([[0], ranks, [depth]])
    gap = np.diff(points).max() if depth else 0
    return gap / max(1.0, 2.0 * depth / num_sites)


def check_gap_bound(num_sites: int, max_time: int) -> CheckResult:
    """Every STEADY gap, trailing gap to T included, is <= max(1, 2T/S)."""
    start = time.perf_counter()
    violations = 0
    first_bad = ""
    for depth in range(max_time + 1):
        if max_gap_ratio(num_sites, depth) > 1.0:
            violations += 1
            if not first_bad:
                first_bad = f"first violation at T={depth}"
    return CheckResult(
        f"gap-bound STEADY S={num_sites} T<={max_time}",
        violations == 0,
        max_time + 1,
        violations,
        time.perf_counter() - start,
        first_bad,
    )


def run_surface_suite(
    site_counts=(4, 8, 64, 256), gap_site_counts=(4, 8, 64), max_time=2**16
) -> list[CheckResult]:
    results = []
    for policy in (SurfacePolicy.STEADY, SurfacePolicy.RING):
        for s in site_counts:
            results.append(check_oracle_equivalence(policy, s, max_time))
    for s in gap_site_counts:
        results.append(check_gap_bound(s, max_time))
    return results
