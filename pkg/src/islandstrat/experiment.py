"""End-to-end pipeline shared by the CLI, estimators and acceptance tests."""
from __future__ import annotations

import dataclasses
import time

import numpy as np

from .config import ExperimentConfig
from .io import GenomeRow, genome_rows
from .island import SurfaceConfig
from .mesh import init_sim, run, sample_slots_per_pe, sampling_rng
from .trie import PhylogenyTable, assign_origin_times_naive, build_trie_from_alleles, trie_to_table

REPLICATIONS_PER_SECOND_TARGET = 1e5


def simulate(config: ExperimentConfig):
    sim = init_sim(
        config.mesh,
        config.pe,
        config.treatment,
        config.seed,
        config.surface,
        exact_tracking=config.exact_tracking,
    )
    return run(sim)


def sample_rows(sim, per_pe: int, seed: int) -> list[GenomeRow]:
    return genome_rows(sample_slots_per_pe(sim, per_pe, sampling_rng(seed)))


def run_summary(config: ExperimentConfig, stats) -> dict:
    m = config.mesh
    return {
        "mesh": {"width": m.width, "height": m.height},
        "seed": config.seed,
        "rounds": stats.rounds,
        "wall_seconds": stats.wall_seconds,
        "pe_generations": stats.pe_generations,
        "pe_generations_per_second": stats.pe_generations_per_second,
        "total_replications": stats.replications,
        "replications_per_second": stats.replications_per_second,
        "config": config.to_dict(),
    }


def subsample_rows(rows, subsample: int | None, seed: int) -> list:
    if subsample is None or subsample == len(rows):
        return list(rows)
    if subsample > len(rows):
        raise ValueError(f"subsample {subsample} exceeds the {len(rows)} available genomes")
    if subsample < 1:
        raise ValueError("subsample must be positive")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(1,)))
    keep = np.sort(rng.choice(len(rows), size=subsample, replace=False))
    return [rows[i] for i in keep]


def reconstruct_rows(
    rows, surface: SurfaceConfig, subsample: int | None = None, seed: int = 0
) -> PhylogenyTable:
    """Trie reconstruction from genome rows, labelled ``x_y_slot``."""
    rows = subsample_rows(rows, subsample, seed)
    if not rows:
        raise ValueError("no genomes to reconstruct from")
    root = build_trie_from_alleles(
        [r.alleles(surface) for r in rows], [r.depth for r in rows], [r.label for r in rows]
    )
    return trie_to_table(assign_origin_times_naive(root))


def bench(config: ExperimentConfig, warmup_rounds: int = 10) -> dict:
    """Throughput of the simulator over a timed window after warm-up.

    The halt is pushed back by the warm-up length so the timed window still
    covers ``halt_generations`` generations per PE.
    """
    mesh = dataclasses.replace(
        config.mesh, halt_generations=config.mesh.halt_generations + warmup_rounds
    )
    sim = init_sim(mesh, config.pe, config.treatment, config.seed, config.surface)
    run(sim, max_rounds=warmup_rounds)
    gens0 = sim.pe_generations
    start = time.perf_counter()
    run(sim)
    wall = time.perf_counter() - start
    gens = sim.pe_generations - gens0
    pe_rate = gens / wall if wall > 0 else float("inf")
    rep_rate = pe_rate * config.pe.pop_size
    return {
        "mesh": {"width": config.mesh.width, "height": config.mesh.height},
        "warmup_rounds": warmup_rounds,
        "timed_pe_generations": gens,
        "wall_seconds": wall,
        "pe_generations_per_second": pe_rate,
        "replications_per_second": rep_rate,
        "replications_per_day": rep_rate * 86400,
        "replications_per_second_target": REPLICATIONS_PER_SECOND_TARGET,
        "meets_target": rep_rate >= REPLICATIONS_PER_SECOND_TARGET,
    }
