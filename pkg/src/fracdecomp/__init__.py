"""Fractional clique decompositions of dense multipartite graphs.

The fan system ``(M_G + eta K[G]) x = 1`` is solved for edge weights and lifted
to clique weights; scheme algebra, norm bounds and the latin-square pipeline
live in the submodules.
"""

from .errors import (DomainError, FracDecompError, ParseError, PreconditionError, ResourceError,
                     UnsupportedError, ValidityError)
from .fan_solver import (FanWeights, SolveReport, SolverConfig, TriangleWeights, lift_to_triangles,
                         solve_fans, verify_decomposition)
from .latin import PartialLatinSquare, build_gp, fractional_complete, parse_pls
from .partite_graph import PartiteGraph, complete_multipartite, is_locally_balanced
from .scheme_core import SchemeParams, build_scheme_table, eigenvalues_M

__version__ = "0.1.0"

__all__ = [
    "DomainError", "FracDecompError", "ParseError", "PreconditionError", "ResourceError",
    "UnsupportedError", "ValidityError", "FanWeights", "SolveReport", "SolverConfig",
    "TriangleWeights", "lift_to_triangles", "solve_fans", "verify_decomposition",
    "PartialLatinSquare", "build_gp", "fractional_complete", "parse_pls", "PartiteGraph",
    "complete_multipartite", "is_locally_balanced", "SchemeParams", "build_scheme_table",
    "eigenvalues_M",
]
