"""Relational graph convolutional networks on numpy.

Sparse kernels, relational message passing with full, basis, block-diagonal
and diagonal weights, node classification, and DistMult link prediction.
"""

from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    DomainError,
    IntegrityError,
    NonFiniteError,
    ParseError,
    RelGCNError,
    UnsupportedContractionError,
    UsageError,
)
from .graph import (
    AugmentedGraph,
    EdgeDropout,
    EdgeSample,
    KnowledgeGraph,
    LabeledNodeSet,
    augment,
    build_adjacency,
    negative_sample,
    prune_khop,
    sample_edges_neighborhood,
    sample_edges_uniform,
)
from .layers import (
    BasisWeights,
    BlockWeights,
    DiagonalWeights,
    FullWeights,
    LayerConfig,
    crgcn_forward,
    ergcn_forward,
    materialize,
    rgcn_forward,
)
from .sparse import SparseMatrix, dense_contract, row_normalize, spmm, stack_horizontal, stack_vertical

__version__ = "0.1.0"
