"""Island-model GA with hereditary-stratigraphy annotations and
trie-based phylogeny reconstruction."""
from .config import ExperimentConfig, config_from_dict, load_config
from .exceptions import ConfigError, DataError
from .island import Genome, PeConfig, PedigreeRecord, SurfaceConfig, TreatmentConfig
from .mesh import MeshConfig, init_sim, run, step_round
from .metrics import METRIC_NAMES, MetricsReport, compute_report
from .surface import (
    Allele,
    SurfaceAnnotation,
    SurfacePolicy,
    assign_storage_site,
    lookup_resident_times,
    replay_oracle,
)
from .trie import PhylogenyTable, compare_to_pedigree, reconstruct, to_newick

__version__ = "0.1.0"

__all__ = [
    "Allele",
    "ConfigError",
    "DataError",
    "ExperimentConfig",
    "Genome",
    "METRIC_NAMES",
    "MeshConfig",
    "MetricsReport",
    "PeConfig",
    "PedigreeRecord",
    "PhylogenyTable",
    "SurfaceAnnotation",
    "SurfaceConfig",
    "SurfacePolicy",
    "TreatmentConfig",
    "assign_storage_site",
    "compare_to_pedigree",
    "compute_report",
    "config_from_dict",
    "init_sim",
    "load_config",
    "lookup_resident_times",
    "reconstruct",
    "replay_oracle",
    "run",
    "step_round",
    "to_newick",
]
