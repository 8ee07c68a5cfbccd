"""Orthogonal polynomials on the two-torus and their structured
matrix algebra: doubly Toeplitz moment matrices, matrix Szego
recursion, level recurrences, parameter synthesis of positive
functionals, and two-variable spectral factorization."""

from . import bipoly, fejer, linalg, moments, opuc, synthesis

__all__ = ["bipoly", "fejer", "linalg", "moments", "opuc", "synthesis"]
__version__ = "0.1.0"
