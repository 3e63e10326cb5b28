"""Fixed-width "surface" storage for per-generation lineage fingerprints.

Every generation a lineage deposits one differentia value.  A surface keeps
``num_sites`` of them in a constant-size buffer; which deposition lands in
which site is a pure function of ``(policy, num_sites, time)``, so the
deposition time (rank) of every resident value can be recovered from its
position alone and never has to be stored.

Two placement policies are provided:

``RING``
    last-writer-wins modulo ``num_sites``; keeps the most recent ranks.
``STEADY``
    epoch-doubling rule keeping retained ranks roughly evenly spaced over
    all elapsed time.  Epoch 0 fills sites densely.  Epoch ``e >= 1`` spans
    ``[S * 2**(e-1), S * 2**e)`` and stores only times divisible by
    ``2**e``; its k-th store evicts the k-th smallest resident rank that is
    an odd multiple of ``2**(e-1)``.
"""
from __future__ import annotations

import enum
import functools
import struct
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .exceptions import ConfigError

DIFFERENTIA_WIDTHS = (1, 8, 16, 32, 64)


class SurfacePolicy(enum.Enum):
    STEADY = "steady"
    RING = "ring"

    @classmethod
    def coerce(cls, value) -> "SurfacePolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown surface policy {value!r}") from None


class Allele(NamedTuple):
    rank: int
    differentia: int


def check_surface_params(policy, num_sites, differentia_width=None) -> SurfacePolicy:
    policy = SurfacePolicy.coerce(policy)
    if not isinstance(num_sites, (int, np.integer)) or isinstance(num_sites, bool):
        raise ConfigError(f"num_sites must be an integer, got {num_sites!r}")
    if policy is SurfacePolicy.STEADY:
        if num_sites < 2 or num_sites & (num_sites - 1):
            raise ConfigError(
                f"STEADY policy needs a power-of-two num_sites >= 2, got {num_sites}"
            )
    elif num_sites < 1:
        raise ConfigError(f"RING policy needs num_sites >= 1, got {num_sites}")
    if differentia_width is not None and differentia_width not in DIFFERENTIA_WIDTHS:
        raise ConfigError(
            f"differentia_width must be one of {DIFFERENTIA_WIDTHS}, "
            f"got {differentia_width!r}"
        )
    return policy


def _steady_site(num_sites: int, time: int) -> int | None:
    # A stored time's site is the site of the rank it evicts; that rank sits
    # in a strictly earlier epoch, so this loop runs O(log T) times.
    if time >= num_sites:
        half = 1 << ((time // num_sites).bit_length() - 1)
        if time % (half << 1):
            return None
    while time >= num_sites:
        half = 1 << ((time // num_sites).bit_length() - 1)
        k = (time - num_sites * half) // (half << 1)
        time = half * (2 * k + 1)
    return time


@functools.lru_cache(maxsize=None)
def _steady_epoch_table(num_sites: int, epoch: int) -> tuple[np.ndarray, np.ndarray]:
    """Occupancy (site -> rank) at the start of ``epoch`` and the sites whose
    ranks get evicted during that epoch, in eviction order."""
    if epoch == 1:
        occupancy = np.arange(num_sites, dtype=np.int64)
    else:
        prev, prev_evict = _steady_epoch_table(num_sites, epoch - 1)
        half = 1 << (epoch - 2)
        base = num_sites * half
        occupancy = prev.copy()
        occupancy[prev_evict] = base + 2 * half * np.arange(len(prev_evict))
    half = 1 << (epoch - 1)
    odd = np.flatnonzero(occupancy % (2 * half) == half)
    evict = odd[np.argsort(occupancy[odd], kind="stable")]
    occupancy.flags.writeable = False
    evict.flags.writeable = False
    return occupancy, evict


def assign_storage_site(policy, num_sites: int, time: int) -> int | None:
    """Site written by the deposition at ``time``, or ``None`` to skip it."""
    policy = check_surface_params(policy, num_sites)
    if time < 0:
        raise ValueError(f"time must be non-negative, got {time}")
    if policy is SurfacePolicy.RING:
        return time % num_sites
    return _steady_site(num_sites, time)


def retained_ranks(policy, num_sites: int, depth: int) -> np.ndarray:
    """Sorted ranks resident after ``depth`` depositions."""
    policy = check_surface_params(policy, num_sites)
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    if policy is SurfacePolicy.RING or depth <= num_sites:
        return np.arange(max(0, depth - num_sites), depth, dtype=np.int64)

    half = 1 << (((depth - 1) // num_sites).bit_length() - 1)
    grain = half << 1
    base = num_sites * half
    fresh = np.arange(base, depth, grain, dtype=np.int64)
    # previous epoch's survivors: multiples of `half` below `base`; the odd
    # ones are evicted smallest-first, one per store made this epoch
    evens = np.arange(0, base, grain, dtype=np.int64)
    odds = np.arange(half, base, grain, dtype=np.int64)[len(fresh):]
    return np.sort(np.concatenate([evens, odds, fresh]))


def resident_ranks(policy, num_sites: int, depth: int) -> np.ndarray:
    """Site-indexed array of resident ranks after ``depth`` depositions.

    Unwritten sites hold -1.
    """
    policy = check_surface_params(policy, num_sites)
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    if policy is SurfacePolicy.RING:
        out = np.full(num_sites, -1, dtype=np.int64)
        ranks = np.arange(max(0, depth - num_sites), depth, dtype=np.int64)
        out[ranks % num_sites] = ranks
        return out
    if depth <= num_sites:
        out = np.full(num_sites, -1, dtype=np.int64)
        out[:depth] = np.arange(depth)
        return out
    epoch = ((depth - 1) // num_sites).bit_length()
    start, evict = _steady_epoch_table(num_sites, epoch)
    half = 1 << (epoch - 1)
    fresh = np.arange(num_sites * half, depth, 2 * half, dtype=np.int64)
    out = start.copy()
    out[evict[: len(fresh)]] = fresh
    return out


def lookup_resident_times(policy, num_sites: int, depth: int) -> list[tuple[int, int]]:
    """(site, rank) for every site written by depositions ``0 .. depth-1``.

    Unwritten sites are omitted.  Pairs are ordered by site index.
    """
    policy = check_surface_params(policy, num_sites)
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    resident = resident_ranks(policy, num_sites, depth)
    return [(int(s), int(r)) for s, r in enumerate(resident) if r >= 0]


def iter_replay(policy, num_sites: int, depth: int) -> Iterator[tuple[int, int | None, np.ndarray]]:
    """Brute-force replay of depositions ``0 .. depth-1``.

    Yields ``(time, site_written, occupancy)`` after each deposition, where
    ``occupancy[site]`` is the resident rank or -1.  The occupancy array is
    reused between steps; copy it if you keep it.  The eviction rule is
    applied literally against buffer contents and shares no code with the
    closed-form placement functions.
    """
    policy = check_surface_params(policy, num_sites)
    occupancy = np.full(num_sites, -1, dtype=np.int64)
    for time in range(depth):
        site = None
        if policy is SurfacePolicy.RING:
            site = time % num_sites
        elif time < num_sites:
            site = time
        else:
            half = 1
            while num_sites * half * 2 <= time:
                half *= 2
            if time % (2 * half) == 0:
                candidates = np.flatnonzero(occupancy % (2 * half) == half)
                site = int(candidates[np.argmin(occupancy[candidates])])
        if site is not None:
            occupancy[site] = time
        yield time, site, occupancy


def replay_oracle(policy, num_sites: int, depth: int) -> list[tuple[int, int]]:
    occupancy = np.full(num_sites, -1, dtype=np.int64)
    for _, _, occupancy in iter_replay(policy, num_sites, depth):
        pass
    return [(int(s), int(r)) for s, r in enumerate(occupancy) if r >= 0]


@dataclass(frozen=True)
class SurfaceAnnotation:
    """Immutable fingerprint buffer plus its deposition counter."""

    policy: SurfacePolicy
    num_sites: int
    differentia_width: int
    sites: tuple[int, ...] = field(default=())
    depth: int = 0

    def __post_init__(self):
        policy = check_surface_params(self.policy, self.num_sites, self.differentia_width)
        object.__setattr__(self, "policy", policy)
        if not self.sites:
            object.__setattr__(self, "sites", (0,) * self.num_sites)
        if len(self.sites) != self.num_sites:
            raise ValueError(
                f"expected {self.num_sites} sites, got {len(self.sites)}"
            )
        limit = 1 << self.differentia_width
        if any(not 0 <= v < limit for v in self.sites):
            raise ValueError(f"site value outside {self.differentia_width}-bit range")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")

    @classmethod
    def blank(cls, policy, num_sites: int, differentia_width: int) -> "SurfaceAnnotation":
        return cls(policy, num_sites, differentia_width)

    def deposit(self, differentia: int) -> "SurfaceAnnotation":
        return deposit(self, differentia)

    def alleles(self) -> list[Allele]:
        return extract_alleles(self)

    def to_bytes(self) -> bytes:
        return pack_annotation(self.sites, self.differentia_width, self.depth)

    @classmethod
    def from_bytes(cls, data: bytes, policy, num_sites: int, differentia_width: int):
        sites, depth = unpack_annotation(data, num_sites, differentia_width)
        return cls(policy, num_sites, differentia_width, tuple(sites), depth)


def deposit(annotation: SurfaceAnnotation, differentia: int) -> SurfaceAnnotation:
    if not 0 <= differentia < (1 << annotation.differentia_width):
        raise ValueError(
            f"differentia {differentia} does not fit in "
            f"{annotation.differentia_width} bits"
        )
    site = assign_storage_site(annotation.policy, annotation.num_sites, annotation.depth)
    sites = annotation.sites
    if site is not None:
        sites = sites[:site] + (int(differentia),) + sites[site + 1:]
    return SurfaceAnnotation(
        annotation.policy,
        annotation.num_sites,
        annotation.differentia_width,
        sites,
        annotation.depth + 1,
    )


def extract_alleles(annotation: SurfaceAnnotation) -> list[Allele]:
    """Resident (rank, differentia) pairs in ascending rank order."""
    return alleles_from_sites(
        annotation.policy, annotation.num_sites, annotation.depth, annotation.sites
    )


def alleles_from_sites(policy, num_sites: int, depth: int, sites) -> list[Allele]:
    resident = resident_ranks(policy, num_sites, depth)
    occupied = np.flatnonzero(resident >= 0)
    order = occupied[np.argsort(resident[occupied], kind="stable")]
    return [Allele(int(resident[s]), int(sites[s])) for s in order]


def packed_size(num_sites: int, differentia_width: int) -> int:
    return (num_sites * differentia_width + 7) // 8 + 4


def pack_annotation(sites, differentia_width: int, depth: int) -> bytes:
    """Little-endian bit packing of the sites followed by a uint32 depth."""
    value = 0
    for i, v in enumerate(sites):
        value |= int(v) << (i * differentia_width)
    nbytes = (len(sites) * differentia_width + 7) // 8
    if not 0 <= depth < 2**32:
        raise ValueError(f"depth {depth} does not fit the 32-bit layout")
    return value.to_bytes(nbytes, "little") + struct.pack("<I", depth)


def unpack_annotation(data: bytes, num_sites: int, differentia_width: int):
    nbytes = (num_sites * differentia_width + 7) // 8
    if len(data) != nbytes + 4:
        raise ValueError(
            f"expected {nbytes + 4} bytes for {num_sites}x{differentia_width}-bit "
            f"annotation, got {len(data)}"
        )
    value = int.from_bytes(data[:nbytes], "little")
    mask = (1 << differentia_width) - 1
    sites = [(value >> (i * differentia_width)) & mask for i in range(num_sites)]
    (depth,) = struct.unpack("<I", data[nbytes:])
    return sites, depth
