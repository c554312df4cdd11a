"""Scale-free motif machinery: atlases, partition optimizers, graph sampling,
censuses, and limit-constant estimators for heavy-tailed random graphs."""

__version__ = "0.1.0"

from .motifs import (  # noqa: F401
    MotifError,
    MotifGraph,
    automorphism_count,
    canonical_form,
    count_copies_in,
    enumerate_connected_graphs,
    motif_by_name,
    motif_from_edges,
    parse_motif,
)
