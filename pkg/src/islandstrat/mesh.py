"""Software model of an asynchronous 2-D mesh of processing elements.

Each ordered pair of neighbouring PEs is joined by a directed link carrying
at most one in-flight batch of emigrants.  Delivery of a batch sets the
destination's "receive complete" flag and the source's "send complete"
flag; a PE only notices them the next time it runs its update loop
(:func:`poll_and_exchange`), at which point it integrates immigrants,
refills the emigration buffer and dispatches a new send.

Hardware timing is modelled by a per-send latency drawn uniformly from
``[latency_min, latency_max]`` scheduler rounds and by letting each PE skip
a round with probability ``1 - step_probability``.  A batch whose
destination has not yet consumed the previous one waits in flight.

Random streams: every PE owns one (seeded from the global seed and its
coordinate) used for selection, mutation, migration sampling and send
latency.  A separate scheduler stream drives visit order and step gating.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError
from .island import (
    GenomeBatch,
    PeConfig,
    PeState,
    SurfaceConfig,
    TreatmentConfig,
    advance_generation,
    make_pe_rng,
    sample_slots,
)

# (name, dx, dy); y grows downward so row-major order is (y, x)
DIRECTIONS = (("E", 1, 0), ("S", 0, 1), ("N", 0, -1), ("W", -1, 0))

_SCHEDULER_KEY = (0xFFFF_FFFF,)
_SAMPLING_KEY = (0xFFFF_FFFE,)


@dataclass(frozen=True)
class MeshConfig:
    width: int = 4
    height: int = 4
    mig_buffer_size: int = 1
    latency_min: int = 1
    latency_max: int = 4
    step_probability: float = 0.9
    halt_generations: int = 100
    torus: bool = False

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"mesh dimensions must be positive, got {self.width}x{self.height}")
        if self.mig_buffer_size < 0:
            raise ConfigError("mig_buffer_size must be non-negative")
        if not 1 <= self.latency_min <= self.latency_max:
            raise ConfigError("need 1 <= latency_min <= latency_max")
        if not 0.0 < self.step_probability <= 1.0:
            raise ConfigError("step_probability must lie in (0, 1]")
        if self.halt_generations < 1:
            raise ConfigError("halt_generations must be positive")

    @property
    def n_pes(self) -> int:
        return self.width * self.height


@dataclass
class LinkState:
    src: int
    dst: int
    direction: str
    in_flight: GenomeBatch | None = None
    delivery_round: int | None = None
    send_complete_flag: bool = False
    receive_complete_flag: bool = False
    emigration_buffer: GenomeBatch | None = None
    immigration_buffer: GenomeBatch | None = None


@dataclass
class SimState:
    mesh: MeshConfig
    pe_config: PeConfig
    treatment: TreatmentConfig
    surface: SurfaceConfig
    seed: int
    pes: list[PeState]
    links: list[LinkState]
    outgoing: list[list[int]]
    incoming: list[list[int]]
    scheduler_rng: np.random.Generator
    round: int = 0
    exact_tracking: bool = False
    pending: dict[int, list[int]] = field(default_factory=dict)
    pe_generations: int = 0

    def pe_at(self, coordinate) -> PeState:
        x, y = coordinate
        return self.pes[y * self.mesh.width + x]

    def generations(self) -> np.ndarray:
        return np.array([pe.generation for pe in self.pes])

    def pedigree(self):
        records = []
        for pe in self.pes:
            records.extend(pe.pedigree_records())
        return records


def neighbour_links(mesh: MeshConfig) -> list[tuple[int, int, str]]:
    """Directed links in row-major source order, then E, S, N, W."""
    links = []
    for y in range(mesh.height):
        for x in range(mesh.width):
            for name, dx, dy in DIRECTIONS:
                nx, ny = x + dx, y + dy
                if mesh.torus:
                    nx, ny = nx % mesh.width, ny % mesh.height
                elif not (0 <= nx < mesh.width and 0 <= ny < mesh.height):
                    continue
                if (nx, ny) == (x, y):
                    continue
                links.append((y * mesh.width + x, ny * mesh.width + nx, name))
    return links


def _dispatch(sim: SimState, link_index: int, rng: np.random.Generator) -> None:
    link = sim.links[link_index]
    m = sim.mesh
    latency = int(rng.integers(m.latency_min, m.latency_max + 1))
    link.in_flight = link.emigration_buffer
    link.delivery_round = sim.round + latency
    sim.pending.setdefault(link.delivery_round, []).append(link_index)


def _refill_and_send(sim: SimState, link_index: int) -> None:
    link = sim.links[link_index]
    pe = sim.pes[link.src]
    slots = sample_slots(pe.rng, pe.pop_size, sim.mesh.mig_buffer_size)
    link.emigration_buffer = pe.take(slots)
    _dispatch(sim, link_index, pe.rng)


def init_sim(
    mesh: MeshConfig,
    pe: PeConfig,
    treatment: TreatmentConfig,
    seed: int,
    surface: SurfaceConfig | None = None,
    *,
    exact_tracking: bool = False,
) -> SimState:
    surface = surface or SurfaceConfig()
    if mesh.mig_buffer_size > pe.pop_size:
        raise ConfigError("mig_buffer_size cannot exceed pop_size")
    pes = []
    for y in range(mesh.height):
        for x in range(mesh.width):
            pes.append(
                PeState.found(
                    (x, y),
                    pe,
                    surface,
                    make_pe_rng(seed, (x, y)),
                    index=y * mesh.width + x,
                    id_stride=mesh.n_pes,
                    track_pedigree=exact_tracking,
                )
            )
    links = [LinkState(src, dst, name) for src, dst, name in neighbour_links(mesh)]
    outgoing = [[] for _ in pes]
    incoming = [[] for _ in pes]
    for i, link in enumerate(links):
        outgoing[link.src].append(i)
    # a receiver handles arrivals in the fixed E, S, N, W order of the
    # neighbour they come from
    order = {name: j for j, (name, _, _) in enumerate(DIRECTIONS)}
    opposite = {"E": "W", "W": "E", "N": "S", "S": "N"}
    for i, link in enumerate(links):
        incoming[link.dst].append(i)
    for lst in incoming:
        lst.sort(key=lambda i: (order[opposite[links[i].direction]], i))

    sim = SimState(
        mesh=mesh,
        pe_config=pe,
        treatment=treatment,
        surface=surface,
        seed=int(seed),
        pes=pes,
        links=links,
        outgoing=outgoing,
        incoming=incoming,
        scheduler_rng=np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=_SCHEDULER_KEY))
        ),
        exact_tracking=exact_tracking,
    )
    if mesh.mig_buffer_size > 0:
        for i in range(len(links)):
            _refill_and_send(sim, i)
    return sim


def deliver_due(sim: SimState) -> int:
    """Complete every send due this round whose receiver is ready."""
    due = sim.pending.pop(sim.round, [])
    delivered = 0
    for i in sorted(due):
        link = sim.links[i]
        if link.receive_complete_flag:
            # receiver has not reopened its receive yet; retry next round
            sim.pending.setdefault(sim.round + 1, []).append(i)
            continue
        link.immigration_buffer = link.in_flight
        link.in_flight = None
        link.delivery_round = None
        link.receive_complete_flag = True
        link.send_complete_flag = True
        delivered += 1
    return delivered


def poll_and_exchange(sim: SimState, pe_index, rng=None) -> None:
    """One PE's flag-testing half of the update loop."""
    if isinstance(pe_index, tuple):
        x, y = pe_index
        pe_index = y * sim.mesh.width + x
    pe = sim.pes[pe_index]
    rng = pe.rng if rng is None else rng
    for i in sim.incoming[pe_index]:
        link = sim.links[i]
        if link.receive_complete_flag:
            batch = link.immigration_buffer
            pe.put(sample_slots(rng, pe.pop_size, len(batch)), batch)
            link.immigration_buffer = None
            link.receive_complete_flag = False
    for i in sim.outgoing[pe_index]:
        link = sim.links[i]
        if link.send_complete_flag:
            link.send_complete_flag = False
            slots = sample_slots(rng, pe.pop_size, sim.mesh.mig_buffer_size)
            link.emigration_buffer = pe.take(slots)
            _dispatch(sim, i, rng)


def step_round(sim: SimState) -> SimState:
    deliver_due(sim)
    n = len(sim.pes)
    order = sim.scheduler_rng.permutation(n)
    gates = sim.scheduler_rng.random(n) < sim.mesh.step_probability
    halt = sim.mesh.halt_generations
    for i in order:
        if gates[i] and sim.pes[i].generation < halt:
            poll_and_exchange(sim, int(i))
            advance_generation(sim.pes[i], sim.treatment, sim.pe_config)
            sim.pe_generations += 1
    sim.round += 1
    return sim


@dataclass
class RunStats:
    rounds: int
    wall_seconds: float
    pe_generations: int
    replications: int

    @property
    def pe_generations_per_second(self) -> float:
        return self.pe_generations / self.wall_seconds if self.wall_seconds > 0 else float("inf")

    @property
    def replications_per_second(self) -> float:
        return self.replications / self.wall_seconds if self.wall_seconds > 0 else float("inf")


def run(sim: SimState, max_rounds: int | None = None) -> tuple[SimState, RunStats]:
    """Step until every PE has reached ``halt_generations``."""
    halt = sim.mesh.halt_generations
    start_round, start_gens = sim.round, sim.pe_generations
    start = time.perf_counter()
    while any(pe.generation < halt for pe in sim.pes):
        if max_rounds is not None and sim.round - start_round >= max_rounds:
            break
        step_round(sim)
    wall = time.perf_counter() - start
    gens = sim.pe_generations - start_gens
    return sim, RunStats(
        rounds=sim.round - start_round,
        wall_seconds=wall,
        pe_generations=gens,
        replications=gens * sim.pe_config.pop_size,
    )


def sampling_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=_SAMPLING_KEY))
    )


def sample_slots_per_pe(sim: SimState, per_pe: int, rng) -> list[tuple[PeState, np.ndarray]]:
    if not 0 <= per_pe <= sim.pe_config.pop_size:
        raise ValueError(f"per_pe must lie in [0, {sim.pe_config.pop_size}]")
    out = []
    for pe in sim.pes:
        if per_pe == pe.pop_size:
            slots = np.arange(pe.pop_size)
        else:
            slots = np.sort(rng.permutation(pe.pop_size)[:per_pe])
        out.append((pe, slots))
    return out


def sample_genomes(sim: SimState, per_pe: int, rng):
    """``(coordinate, slot, Genome)`` for ``per_pe`` residents of every PE."""
    return [
        (pe.coordinate, int(s), pe.genome(int(s)))
        for pe, slots in sample_slots_per_pe(sim, per_pe, rng)
        for s in slots
    ]
