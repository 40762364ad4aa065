"""Equitable two-cell partitions of Johnson graphs J(n, w).

Modules:
    core           vertices, colex ranking, adjacency, spectrum
    partitions     partitions, quotient matrices, file formats
    eigenfn        vertex functions, partial differences, standard forms
    constructions  prefix-pattern partitions on J(2w, w)
    search         exhaustive enumeration with constraint propagation
    canon          canonical forms under coordinate permutations and cell swap
"""

__version__ = "0.1.0"

from .core import GraphParams, ParameterError, Vertex, Witness, eigenvalue, spectrum
from .partitions import QuotientMatrix, TwoPartition, admissible_matrices, verify_equitable

__all__ = [
    "GraphParams", "ParameterError", "QuotientMatrix", "TwoPartition", "Vertex", "Witness",
    "admissible_matrices", "eigenvalue", "spectrum", "verify_equitable", "__version__",
]
