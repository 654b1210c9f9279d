"""Protein classification via generalized edit distances, contact graphs,
spectral seriation, and graph-complexity features.

The heavy edit-distance recurrence lives in a compiled extension when one
was built; :data:`COMPILED_CORE` reports which core is active. Both cores
follow the same accumulation order, so their distances agree bitwise.
"""

from .errors import ConfigError, DataError, FoldrepError, NumericError
from .seqdist import (
    AMINO_ACIDS,
    COMPILED_CORE,
    CostMatrix,
    MatrixScheme,
    UnitScheme,
    VectorScheme,
    levenshtein,
    pairwise_distances,
)

__version__ = "0.1.0"

__all__ = [
    "AMINO_ACIDS",
    "COMPILED_CORE",
    "ConfigError",
    "CostMatrix",
    "DataError",
    "FoldrepError",
    "MatrixScheme",
    "NumericError",
    "UnitScheme",
    "VectorScheme",
    "levenshtein",
    "pairwise_distances",
    "__version__",
]
