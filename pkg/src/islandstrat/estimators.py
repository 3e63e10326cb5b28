"""scikit-learn compatible wrappers.

``TrieReconstructor`` turns a sample of annotated genomes into a phylogeny
table and ``PhylometricsTransformer`` turns tables into metric rows, so the
two chain in a :class:`~sklearn.pipeline.Pipeline`::

    pipe = make_pipeline(TrieReconstructor(), PhylometricsTransformer())
    features = pipe.fit_transform(genomes)   # shape (1, 5)

``IslandSimulator`` exposes the mesh simulation with ``get_params`` /
``set_params`` so parameter sweeps can reuse sklearn tooling.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import experiment
from ._validation import check_annotations, check_labels, check_tables
from .config import ExperimentConfig
from .island import PeConfig, SurfaceConfig, TreatmentConfig
from .mesh import MeshConfig, sample_genomes, sampling_rng
from .metrics import METRIC_NAMES, compute_report
from .trie import assign_origin_times_naive, build_trie_from_artifacts, trie_to_table


class TrieReconstructor(TransformerMixin, BaseEstimator):
    """Reconstruct a phylogeny from one population sample.

    Parameters
    ----------
    subsample : int or None
        Reconstruct from this many uniformly chosen genomes.
    skip_missing_ranks : bool
        Let descent pass trie ranks the inserted annotation has evicted.
    random_state : int
        Seed for subsampling.
    """

    def __init__(self, subsample=None, skip_missing_ranks=True, random_state=0):
        self.subsample = subsample
        self.skip_missing_ranks = skip_missing_ranks
        self.random_state = random_state

    def fit(self, X, y=None):
        """Build the trie; ``y`` optionally supplies taxon labels."""
        annotations = check_annotations(X)
        labels = check_labels(y, len(annotations))
        keep = experiment.subsample_rows(
            list(range(len(annotations))), self.subsample, self.random_state
        )
        self.trie_ = build_trie_from_artifacts(
            [annotations[i] for i in keep],
            [labels[i] for i in keep],
            skip_missing_ranks=self.skip_missing_ranks,
        )
        self.phylogeny_ = trie_to_table(assign_origin_times_naive(self.trie_))
        self.n_taxa_ = len(keep)
        return self

    def transform(self, X):
        check_is_fitted(self, "phylogeny_")
        return self.phylogeny_

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X, y).phylogeny_


class PhylometricsTransformer(TransformerMixin, BaseEstimator):
    """Map each phylogeny table to a row of the five phylometrics."""

    def fit(self, X, y=None):
        check_tables(X)
        self.n_features_out_ = len(METRIC_NAMES)
        return self

    def transform(self, X):
        tables = check_tables(X)
        return np.vstack([compute_report(t).as_vector() for t in tables])

    def get_feature_names_out(self, input_features=None):
        return np.array(METRIC_NAMES, dtype=object)


class IslandSimulator(BaseEstimator):
    """Run the asynchronous island model; ``fit`` ignores its inputs."""

    def __init__(
        self,
        width=4,
        height=4,
        halt_generations=100,
        pop_size=32,
        tournament_k=5,
        mig_buffer_size=1,
        step_probability=0.9,
        p_deleterious=0.33,
        p_beneficial=0.0,
        policy="steady",
        num_sites=64,
        differentia_width=1,
        exact_tracking=False,
        random_state=0,
    ):
        self.width = width
        self.height = height
        self.halt_generations = halt_generations
        self.pop_size = pop_size
        self.tournament_k = tournament_k
        self.mig_buffer_size = mig_buffer_size
        self.step_probability = step_probability
        self.p_deleterious = p_deleterious
        self.p_beneficial = p_beneficial
        self.policy = policy
        self.num_sites = num_sites
        self.differentia_width = differentia_width
        self.exact_tracking = exact_tracking
        self.random_state = random_state

    def to_config(self) -> ExperimentConfig:
        return ExperimentConfig(
            mesh=MeshConfig(
                self.width,
                self.height,
                mig_buffer_size=self.mig_buffer_size,
                step_probability=self.step_probability,
                halt_generations=self.halt_generations,
            ),
            pe=PeConfig(self.pop_size, self.tournament_k),
            treatment=TreatmentConfig(self.p_deleterious, self.p_beneficial),
            surface=SurfaceConfig(self.policy, self.num_sites, self.differentia_width),
            seed=self.random_state,
            exact_tracking=self.exact_tracking,
        )

    def fit(self, X=None, y=None):
        self.sim_, self.stats_ = experiment.simulate(self.to_config())
        return self

    def sample(self, per_pe=1):
        """``(coordinate, slot, Genome)`` triples, ``per_pe`` from each PE."""
        check_is_fitted(self, "sim_")
        return sample_genomes(self.sim_, per_pe, sampling_rng(self.random_state))
