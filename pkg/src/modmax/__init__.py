"""Community detection by low-cardinality embedding ascent.

Greedy Louvain/Leiden-style local moves generalized to k-community
embeddings, with exact closed-form coordinate updates, rounding back to
discrete partitions, multi-level drivers, a brute-force optimality oracle,
and a benchmark CLI.
"""

from .embedding import Embedding, basis, dot, topk_plus
from .graph import (EdgeListError, Graph, Partition, aggregate,
                    community_is_connected, load_edge_list, modularity,
                    read_partition, write_edge_list, write_partition)
from .leiden import (IterationRecord, LevelRecord, RefineAggregate, RunConfig,
                     flatten, greedy_local_move, leiden_locale,
                     refine_and_aggregate)
from .locale import (ValidationLog, descent_inequality_check,
                     embedding_objective, gradient, locale_embeddings,
                     locale_rounding, locale_update, projected_gradient_norm)
from .oracle import (brute_force_max_modularity, set_partitions,
                     verify_subproblem_optimum)

__version__ = "0.1.0"

__all__ = [
    "EdgeListError", "Graph", "Partition", "aggregate",
    "community_is_connected", "load_edge_list", "modularity",
    "read_partition", "write_edge_list", "write_partition",
    "Embedding", "basis", "dot", "topk_plus",
    "gradient", "locale_update", "locale_embeddings", "locale_rounding",
    "embedding_objective", "projected_gradient_norm",
    "descent_inequality_check", "ValidationLog",
    "greedy_local_move", "refine_and_aggregate", "leiden_locale", "flatten",
    "RunConfig", "LevelRecord", "IterationRecord", "RefineAggregate",
    "brute_force_max_modularity", "set_partitions",
    "verify_subproblem_optimum",
    "__version__",
]
