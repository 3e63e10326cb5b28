"""Per-processor evolutionary kernel.

A processing element (PE) hosts a fixed-size population stored column-wise
in numpy arrays: fitness, lineage depth, surface sites and lineage ids.
One generation is tournament selection, then mutation of the stored fitness
scalar, then one fingerprint deposit per child.

The population update runs in a compiled kernel; the single-genome
helpers (:func:`mutate`, :func:`tournament_select`, :func:`evaluate`)
implement the same operators in numpy for use outside a PE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .exceptions import ConfigError
from .surface import (
    SurfaceAnnotation,
    SurfacePolicy,
    check_surface_params,
)


_POLICY_CODES = {
    SurfacePolicy.STEADY: _kernel.POLICY_STEADY,
    SurfacePolicy.RING: _kernel.POLICY_RING,
}


def _check_probability(name, value):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class TreatmentConfig:
    p_deleterious: float = 0.33
    p_beneficial: float = 0.0
    sigma_deleterious: float = 0.1
    sigma_beneficial: float = 1.0

    def __post_init__(self):
        _check_probability("p_deleterious", self.p_deleterious)
        _check_probability("p_beneficial", self.p_beneficial)
        if self.p_deleterious + self.p_beneficial > 1.0:
            raise ConfigError("p_deleterious + p_beneficial must not exceed 1")
        for name in ("sigma_deleterious", "sigma_beneficial"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")

    @classmethod
    def purifying_only(cls, **kwargs) -> "TreatmentConfig":
        return cls(p_beneficial=0.0, **kwargs)

    @classmethod
    def adaptation_enabled(cls, **kwargs) -> "TreatmentConfig":
        return cls(p_beneficial=0.003, **kwargs)


@dataclass(frozen=True)
class PeConfig:
    pop_size: int = 32
    tournament_k: int = 5

    def __post_init__(self):
        if self.pop_size < 1:
            raise ConfigError("pop_size must be positive")
        if not 1 <= self.tournament_k <= self.pop_size:
            raise ConfigError("tournament_k must lie in [1, pop_size]")


@dataclass(frozen=True)
class SurfaceConfig:
    policy: SurfacePolicy = SurfacePolicy.STEADY
    num_sites: int = 64
    differentia_width: int = 1

    def __post_init__(self):
        policy = check_surface_params(self.policy, self.num_sites, self.differentia_width)
        object.__setattr__(self, "policy", policy)

    def blank(self) -> SurfaceAnnotation:
        return SurfaceAnnotation.blank(self.policy, self.num_sites, self.differentia_width)


@dataclass(frozen=True)
class Genome:
    fitness: float
    depth: int
    annotation: SurfaceAnnotation
    lineage_id: int = 0

    def __post_init__(self):
        if not math.isfinite(self.fitness):
            raise ValueError("fitness must be finite")
        if self.depth != self.annotation.depth:
            raise ValueError(
                f"genome depth {self.depth} != annotation depth {self.annotation.depth}"
            )


@dataclass(frozen=True)
class PedigreeRecord:
    child_id: int
    parent_id: int
    birth_generation: int  # rank deposited at birth, i.e. the parent's depth
    pe_coordinate: tuple[int, int]


def evaluate(genome: Genome) -> float:
    """Fitness hook: the stored scalar itself."""
    return genome.fitness


def mutation_deltas(n: int, treatment: TreatmentConfig, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    magnitude = np.abs(rng.standard_normal(n))
    p_del = treatment.p_deleterious
    return np.where(
        u < p_del,
        -treatment.sigma_deleterious * magnitude,
        np.where(u < p_del + treatment.p_beneficial, treatment.sigma_beneficial * magnitude, 0.0),
    )


def mutate(genome: Genome, treatment: TreatmentConfig, rng: np.random.Generator) -> Genome:
    delta = float(mutation_deltas(1, treatment, rng)[0])
    return Genome(genome.fitness + delta, genome.depth, genome.annotation, genome.lineage_id)


def tournament_indices(
    fitness: np.ndarray, n_slots: int, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Winner index for each of ``n_slots`` independent size-``k`` tournaments.

    Contestants are the ``k`` smallest of i.i.d. uniform keys, so each
    tournament samples without replacement and lists contestants in random
    order; ``argmax`` keeps the first maximum, which breaks ties uniformly.
    """
    n = len(fitness)
    if n == 0:
        raise RuntimeError("cannot select from an empty population")
    if not 1 <= k <= n:
        raise ValueError(f"tournament size {k} outside [1, {n}]")
    keys = rng.random((n_slots, n))
    contestants = np.argsort(keys, axis=1)[:, :k]
    best = np.argmax(fitness[contestants], axis=1)
    return contestants[np.arange(n_slots), best]


def tournament_select(population, k: int, rng: np.random.Generator) -> Genome:
    population = list(population)
    if not population:
        raise RuntimeError("cannot select from an empty population")
    fitness = np.array([evaluate(g) for g in population], dtype=np.float64)
    return population[int(tournament_indices(fitness, 1, k, rng)[0])]


def random_differentiae(n: int, width: int, rng: np.random.Generator) -> np.ndarray:
    if width == 64:
        return rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
    return rng.integers(0, 1 << width, size=n, dtype=np.uint64)


@dataclass
class GenomeBatch:
    """Column-wise copy of a few genomes, used for migration buffers."""

    fitness: np.ndarray
    depth: np.ndarray
    sites: np.ndarray
    lineage: np.ndarray

    def __len__(self):
        return len(self.fitness)


def make_pe_rng(seed: int, coordinate) -> np.random.Generator:
    """Independent stream for the PE at ``coordinate`` under a global seed."""
    x, y = coordinate
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(x), int(y))))
    )


@dataclass
class PeState:
    coordinate: tuple[int, int]
    surface: SurfaceConfig
    fitness: np.ndarray
    depth: np.ndarray
    sites: np.ndarray
    lineage: np.ndarray
    rng: np.random.Generator
    index: int = 0
    id_stride: int = 1
    generation: int = 0
    serial: int = 0
    pedigree: list | None = field(default=None, repr=False)

    @classmethod
    def found(
        cls,
        coordinate,
        pe: PeConfig,
        surface: SurfaceConfig,
        rng: np.random.Generator,
        *,
        index: int = 0,
        id_stride: int = 1,
        track_pedigree: bool = False,
    ) -> "PeState":
        """Founding population: fitness 0, depth 0, blank annotations."""
        n = pe.pop_size
        state = cls(
            coordinate=tuple(coordinate),
            surface=surface,
            fitness=np.zeros(n),
            depth=np.zeros(n, dtype=np.int64),
            sites=np.zeros((n, surface.num_sites), dtype=np.uint64),
            lineage=np.zeros(n, dtype=np.int64),
            rng=rng,
            index=index,
            id_stride=id_stride,
            pedigree=[] if track_pedigree else None,
        )
        state.lineage[:] = state._new_ids(n)
        return state

    def _new_ids(self, n: int) -> np.ndarray:
        ids = self.index + self.id_stride * np.arange(self.serial, self.serial + n, dtype=np.int64)
        self.serial += n
        return ids

    @property
    def pop_size(self) -> int:
        return len(self.fitness)

    def genome(self, slot: int) -> Genome:
        s = self.surface
        annotation = SurfaceAnnotation(
            s.policy,
            s.num_sites,
            s.differentia_width,
            tuple(int(v) for v in self.sites[slot]),
            int(self.depth[slot]),
        )
        return Genome(
            float(self.fitness[slot]), int(self.depth[slot]), annotation, int(self.lineage[slot])
        )

    def genomes(self) -> list[Genome]:
        return [self.genome(i) for i in range(self.pop_size)]

    def take(self, slots) -> GenomeBatch:
        slots = np.asarray(slots)
        return GenomeBatch(
            self.fitness[slots].copy(),
            self.depth[slots].copy(),
            self.sites[slots].copy(),
            self.lineage[slots].copy(),
        )

    def put(self, slots, batch: GenomeBatch) -> None:
        slots = np.asarray(slots)
        self.fitness[slots] = batch.fitness
        self.depth[slots] = batch.depth
        self.sites[slots] = batch.sites
        self.lineage[slots] = batch.lineage

    def pedigree_records(self) -> list[PedigreeRecord]:
        out = []
        for child, parent, born in self.pedigree or ():
            out.extend(
                PedigreeRecord(int(c), int(p), int(b), self.coordinate)
                for c, p, b in zip(child, parent, born)
            )
        return out


def sample_slots(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """``m`` distinct slot indices drawn uniformly from ``range(n)``."""
    if m == 1:
        return [int(rng.integers(n))]
    return rng.permutation(n)[:m]


def advance_generation(
    pe: PeState, treatment: TreatmentConfig, config: PeConfig, rng=None
) -> PeState:
    """Replace the population with one generation of offspring, in place.

    Each slot: size-``k`` tournament, fitness mutation, then a fresh random
    differentia deposited on the child's surface.
    """
    rng = pe.rng if rng is None else rng
    if not 1 <= config.tournament_k <= pe.pop_size:
        raise ValueError("tournament_k outside [1, pop_size]")
    s = pe.surface
    n, k = pe.pop_size, config.tournament_k
    uniforms = rng.random(n * (k + 1))
    normals = rng.standard_normal(n)
    diffs = random_differentiae(n, s.differentia_width, rng)
    parents, fitness, depth, sites = _kernel.generation(
        uniforms,
        normals,
        diffs,
        pe.fitness,
        pe.depth,
        pe.sites,
        k,
        treatment.p_deleterious,
        treatment.p_beneficial,
        treatment.sigma_deleterious,
        treatment.sigma_beneficial,
        _POLICY_CODES[s.policy],
    )
    child_ids = pe._new_ids(pe.pop_size)
    if pe.pedigree is not None:
        pe.pedigree.append((child_ids.copy(), pe.lineage[parents], depth - 1))
    pe.fitness = fitness
    pe.depth = depth
    pe.sites = sites
    pe.lineage = child_ids
    pe.generation += 1
    return pe


def run_isolated_pe(
    seed: int,
    coordinate,
    pe: PeConfig,
    treatment: TreatmentConfig,
    surface: SurfaceConfig,
    generations: int,
    *,
    index: int = 0,
    id_stride: int = 1,
) -> PeState:
    """Evolve one PE with no migration, using the stream a mesh would give it."""
    state = PeState.found(
        coordinate, pe, surface, make_pe_rng(seed, coordinate), index=index, id_stride=id_stride
    )
    for _ in range(generations):
        advance_generation(state, treatment, pe)
    return state
