import math

import numpy as np
import pytest

from islandstrat.island import (
    Genome,
    PeConfig,
    PeState,
    SurfaceConfig,
    TreatmentConfig,
    advance_generation,
    evaluate,
    make_pe_rng,
    mutate,
    mutation_deltas,
    run_isolated_pe,
    tournament_indices,
    tournament_select,
)
from islandstrat.surface import SurfaceAnnotation, extract_alleles


def _genome(fitness, surface=SurfaceConfig("ring", 4, 8)):
    return Genome(fitness, 0, surface.blank(), 0)


def test_evaluate_returns_stored_scalar():
    assert evaluate(_genome(0.0)) == 0.0
    assert evaluate(_genome(-3.5)) == -3.5


def test_zero_probability_treatment_is_identity():
    rng = np.random.default_rng(1)
    t = TreatmentConfig(0.0, 0.0)
    g = _genome(1.25)
    for _ in range(100):
        assert mutate(g, t, rng).fitness == 1.25


def test_deleterious_mean_decrement():
    sigma = 0.1
    d = mutation_deltas(10**6, TreatmentConfig(1.0, 0.0, sigma), np.random.default_rng(2))
    assert np.all(d < 0)
    expected = sigma * math.sqrt(2 / math.pi)
    assert abs(-d.mean() - expected) / expected < 0.01


def test_default_deleterious_fraction():
    d = mutation_deltas(10**5, TreatmentConfig.adaptation_enabled(), np.random.default_rng(3))
    assert abs(np.mean(d < 0) - 0.33) < 0.01
    assert 0 < np.mean(d > 0) < 0.01


def test_tournament_full_size_picks_maximum():
    rng = np.random.default_rng(4)
    fitness = rng.normal(size=16)
    winners = tournament_indices(fitness, 1000, 16, rng)
    assert np.all(winners == np.argmax(fitness))


def test_tournament_ties_are_uniform():
    # within 2% of 1/n; n=4 puts that bound about 3.6 sd out
    n, trials = 4, 10**5
    counts = np.bincount(
        tournament_indices(np.zeros(n), trials, 2, np.random.default_rng(5)), minlength=n
    )
    assert np.all(np.abs(counts / trials * n - 1) < 0.02)


def test_tournament_k1_is_uniform():
    n, trials = 8, 10**5
    fitness = np.arange(n, dtype=float)
    counts = np.bincount(
        tournament_indices(fitness, trials, 1, np.random.default_rng(6)), minlength=n
    )
    assert np.all(np.abs(counts / trials - 1 / n) < 0.01)


def test_tournament_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(RuntimeError):
        tournament_select([], 1, rng)
    with pytest.raises(ValueError):
        tournament_indices(np.zeros(3), 1, 4, rng)
    pop = [_genome(f) for f in (0.0, 5.0, 1.0)]
    assert tournament_select(pop, 3, rng).fitness == 5.0


def test_single_slot_generation():
    surface = SurfaceConfig("ring", 4, 8)
    pe = PeState.found((0, 0), PeConfig(1, 1), surface, make_pe_rng(0, (0, 0)))
    parent = pe.genome(0)
    advance_generation(pe, TreatmentConfig(0.0, 0.0), PeConfig(1, 1))
    child = pe.genome(0)
    assert child.fitness == parent.fitness
    assert child.depth == parent.depth + 1
    alleles = extract_alleles(child.annotation)
    assert len(alleles) == 1 and alleles[0][0] == 0


def test_depths_stay_synchronous_without_migration():
    pe = run_isolated_pe(9, (0, 0), PeConfig(16, 5), TreatmentConfig(), SurfaceConfig(), 25)
    assert np.all(pe.depth == 25)
    assert pe.generation == 25


def test_kernel_matches_reference_annotation_update():
    # the compiled kernel must deposit exactly what SurfaceAnnotation.deposit would
    surface = SurfaceConfig("steady", 8, 16)
    pe = PeState.found((1, 2), PeConfig(6, 2), surface, make_pe_rng(3, (1, 2)))
    t = TreatmentConfig(0.0, 0.0)
    for _ in range(40):
        before = [pe.genome(i).annotation for i in range(pe.pop_size)]
        rng_copy = np.random.Generator(np.random.PCG64())
        rng_copy.bit_generator.state = pe.rng.bit_generator.state
        n, k = pe.pop_size, 2
        rng_copy.random(n * (k + 1))
        rng_copy.standard_normal(n)
        diffs = rng_copy.integers(0, 1 << 16, size=n, dtype=np.uint64)
        parents_lineage = pe.lineage.copy()
        pe.pedigree = []
        advance_generation(pe, t, PeConfig(6, 2))
        _, parent_ids, _ = pe.pedigree[0]
        for i in range(n):
            p = int(np.flatnonzero(parents_lineage == parent_ids[i])[0])
            assert pe.genome(i).annotation == before[p].deposit(int(diffs[i]))


def test_annotation_hex_width_64_full_range():
    a = SurfaceAnnotation.blank("ring", 2, 64).deposit(2**64 - 1)
    assert a.sites[0] == 2**64 - 1
