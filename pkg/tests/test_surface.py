import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from islandstrat.exceptions import ConfigError
from islandstrat.surface import (
    SurfaceAnnotation,
    SurfacePolicy,
    assign_storage_site,
    extract_alleles,
    lookup_resident_times,
    pack_annotation,
    packed_size,
    replay_oracle,
    retained_ranks,
    unpack_annotation,
)
from islandstrat.surface_check import check_gap_bound, check_oracle_equivalence, max_gap_ratio

STEADY, RING = SurfacePolicy.STEADY, SurfacePolicy.RING


@pytest.mark.parametrize(
    "policy, S, T, site",
    [(STEADY, 4, 2, 2), (STEADY, 4, 5, None), (STEADY, 4, 6, 3), (RING, 4, 6, 2)],
)
def test_assign_storage_site_examples(policy, S, T, site):
    assert assign_storage_site(policy, S, T) == site


@pytest.mark.parametrize(
    "policy, S, depth, expected",
    [
        (STEADY, 4, 8, {0: 0, 1: 4, 2: 2, 3: 6}),
        (STEADY, 4, 9, {0: 0, 1: 4, 2: 8, 3: 6}),
        (RING, 4, 3, {0: 0, 1: 1, 2: 2}),
        (RING, 4, 6, {0: 4, 1: 5, 2: 2, 3: 3}),
        (STEADY, 4, 4, {0: 0, 1: 1, 2: 2, 3: 3}),
        (STEADY, 4, 13, {0: 0, 1: 4, 2: 8, 3: 12}),
    ],
)
def test_resident_times_examples(policy, S, depth, expected):
    assert dict(lookup_resident_times(policy, S, depth)) == expected
    assert dict(replay_oracle(policy, S, depth)) == expected


def test_deposit_examples():
    a = SurfaceAnnotation.blank(RING, 4, 8).deposit(1)
    assert a.sites == (1, 0, 0, 0) and a.depth == 1

    b = SurfaceAnnotation.blank(STEADY, 4, 8)
    for v in (10, 11, 12, 13, 14):
        b = b.deposit(v)
    before = b.sites
    b = b.deposit(99)  # T=5 is skipped
    assert b.sites == before and b.depth == 6


def test_extract_alleles_examples():
    assert extract_alleles(SurfaceAnnotation.blank(STEADY, 4, 8)) == []
    ring = SurfaceAnnotation.blank(RING, 4, 8)
    for v in (5, 6, 7, 8):
        ring = ring.deposit(v)
    assert extract_alleles(ring) == [(0, 5), (1, 6), (2, 7), (3, 8)]

    steady = SurfaceAnnotation.blank(STEADY, 4, 8)
    for t in range(9):
        steady = steady.deposit(100 + t)
    assert extract_alleles(steady) == [(0, 100), (4, 104), (6, 106), (8, 108)]


def test_bad_parameters():
    with pytest.raises(ConfigError):
        assign_storage_site(STEADY, 3, 0)  # not a power of two
    with pytest.raises(ConfigError):
        assign_storage_site(RING, 0, 0)
    with pytest.raises(ValueError):
        assign_storage_site(STEADY, 4, -1)
    with pytest.raises(ConfigError):
        SurfaceAnnotation.blank(STEADY, 4, 3)
    with pytest.raises(ValueError):
        SurfaceAnnotation.blank(RING, 4, 1).deposit(2)


@given(
    policy=st.sampled_from([STEADY, RING]),
    log_s=st.integers(1, 7),
    depth=st.integers(0, 3000),
)
@settings(max_examples=200, deadline=None)
def test_lookup_matches_replay(policy, log_s, depth):
    S = 1 << log_s
    assert lookup_resident_times(policy, S, depth) == replay_oracle(policy, S, depth)


@given(log_s=st.integers(1, 8), T=st.integers(0, 10**6))
@settings(max_examples=300, deadline=None)
def test_site_in_range(log_s, T):
    S = 1 << log_s
    site = assign_storage_site(STEADY, S, T)
    assert site is None or 0 <= site < S
    assert assign_storage_site(RING, S, T) == T % S
    if T < S:
        assert site == T


@given(log_s=st.integers(2, 8), depth=st.integers(1, 10**6))
@settings(max_examples=200, deadline=None)
def test_retained_ranks_include_zero_and_respect_gap(log_s, depth):
    S = 1 << log_s
    ranks = retained_ranks(STEADY, S, depth)
    assert ranks[0] == 0
    assert len(ranks) == min(depth, S)
    assert max_gap_ratio(S, depth) <= 1.0


@given(
    width=st.sampled_from([1, 2, 4, 8, 16, 32, 64]),
    S=st.sampled_from([4, 16, 64]),
    depth=st.integers(0, 2**32 - 1),
    data=st.data(),
)
@settings(max_examples=100, deadline=None)
def test_pack_roundtrip(width, S, depth, data):
    sites = data.draw(st.lists(st.integers(0, (1 << width) - 1), min_size=S, max_size=S))
    raw = pack_annotation(sites, width, depth)
    assert len(raw) == packed_size(S, width)
    got_sites, got_depth = unpack_annotation(raw, S, width)
    assert list(got_sites) == sites and got_depth == depth


def test_genome_layout_size():
    # 64 one-bit sites plus a 32-bit depth counter and 32-bit fitness make
    # the 128-bit genome; the annotation part is 12 bytes here
    assert packed_size(64, 1) == 12


def test_annotation_bytes_roundtrip():
    a = SurfaceAnnotation.blank(STEADY, 8, 16)
    rng = np.random.default_rng(0)
    for v in rng.integers(0, 1 << 16, size=37):
        a = a.deposit(int(v))
    b = SurfaceAnnotation.from_bytes(a.to_bytes(), STEADY, 8, 16)
    assert b == a


def test_small_exhaustive_checks():
    assert check_oracle_equivalence(STEADY, 8, 4096).passed
    assert check_oracle_equivalence(RING, 8, 4096).passed
    assert check_gap_bound(8, 4096).passed
