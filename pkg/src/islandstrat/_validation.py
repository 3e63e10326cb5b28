"""Input coercion shared by the estimator wrappers."""
from __future__ import annotations

from .exceptions import DataError
from .island import Genome
from .surface import SurfaceAnnotation
from .trie import PhylogenyTable


def check_annotations(X) -> list[SurfaceAnnotation]:
    """Accept annotations or genomes; require one shared surface layout."""
    out = []
    for item in X:
        if isinstance(item, Genome):
            item = item.annotation
        elif isinstance(item, tuple) and len(item) == 3 and isinstance(item[2], Genome):
            item = item[2].annotation  # (coordinate, slot, genome) sample
        if not isinstance(item, SurfaceAnnotation):
            raise TypeError(f"expected SurfaceAnnotation or Genome, got {type(item).__name__}")
        out.append(item)
    if not out:
        raise ValueError("need at least one annotation")
    layout = {(a.policy, a.num_sites, a.differentia_width) for a in out}
    if len(layout) > 1:
        raise ValueError("annotations use heterogeneous surface configurations")
    return out


def check_labels(labels, n: int) -> list:
    if labels is None:
        return [str(i) for i in range(n)]
    labels = list(labels)
    if len(labels) != n:
        raise ValueError(f"got {len(labels)} labels for {n} annotations")
    return labels


def check_tables(X) -> list[PhylogenyTable]:
    if isinstance(X, PhylogenyTable):
        return [X]
    tables = list(X)
    for t in tables:
        if not isinstance(t, PhylogenyTable):
            raise DataError(f"expected PhylogenyTable, got {type(t).__name__}")
    return tables
