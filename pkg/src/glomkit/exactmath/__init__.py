"""Exact rational arithmetic, sparse polynomials, and fraction-free linear algebra."""

from .linalg import (
    divide_exact,
    generic_rank,
    nullspace_exact,
    nullspace_rational,
    nullspace_symbolic,
    poly_proportional,
    proportional,
    rank_exact,
    rank_rational,
)
from .poly import GYROSTAT_PARAM_LETTERS, Monomial, Poly, PolyMatrix, VarTable, grlex_key, monomial_str

__all__ = [
    "GYROSTAT_PARAM_LETTERS",
    "Monomial",
    "Poly",
    "PolyMatrix",
    "VarTable",
    "divide_exact",
    "generic_rank",
    "grlex_key",
    "monomial_str",
    "nullspace_exact",
    "nullspace_rational",
    "nullspace_symbolic",
    "poly_proportional",
    "proportional",
    "rank_exact",
    "rank_rational",
]
