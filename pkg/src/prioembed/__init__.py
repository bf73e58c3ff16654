"""Prioritized metric embeddings: trees into l_inf, randomized Frechet
embeddings, and single ultrametrics and spanning trees, with exact audits."""

__version__ = "0.1.0"

from .errors import InvariantError, PrioEmbedError, ValidationError
from .metric import (MetricSpace, PriorityFunction, PriorityOrdering, WeightedGraph,
                     default_alpha, shortest_path_metric, validate_metric,
                     validate_priority_function)
from .tree import WeightedTree
from .embedding import (DimensionReport, DistortionReport, Embedding, dimension_report,
                        distortion_report, is_non_expansive, linf_distance)
from .folding import crosses, fold_path, k_folding
from .tree_embed import embed_terminal_set, prioritized_tree_embedding, tree_separator
from .frechet import (SampleConfig, build_copied_space_dimension,
                      build_copied_space_distortion, embed_linf_dimension,
                      embed_linf_distortion)
from .ultrametric import UltrametricTree, build_ultrametric, grow_ultrametric_partition
from .petal import (Cluster, SpanningTree, audit_cluster_radii, petal,
                    petal_decomposition_spanning_tree)
from .bounds import BoundSpec, priority_function
