"""Dense complex linear algebra substrate.

Everything here operates on small dense complex matrices (dimension well
under ~100).  Cholesky factorizations are classical outer-product
eliminations without pivoting so that results are deterministic; the
spectral norm is a deterministic power iteration on M†M.  Also provides
the structural 0/1 matrices (selectors, antidiagonal reversals, the
lex/revlex ordering permutation) used throughout the package.
"""

from __future__ import annotations

import numpy as np

TOL_HERMITIAN = 1e-10
TOL_FACTOR = 1e-10
PIVOT_TOL = 1e-12
CONTRACTION_MARGIN = 1e-10

_POWER_ITER_CAP = 500
_POWER_ITER_RTOL = 1e-12


class NotPositiveDefinite(ValueError):
    """A Cholesky pivot fell at or below the pivot tolerance."""


def as_complex_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    return m


def hermitian_defect(h) -> float:
    h = as_complex_matrix(h)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def require_hermitian(h, tol: float = TOL_HERMITIAN) -> np.ndarray:
    h = as_complex_matrix(h)
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
    if hermitian_defect(h) > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return h


def lower_cholesky(h, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Lower triangular A with positive real diagonal and A A† = H.

    Raises NotPositiveDefinite when a pivot drops to pivot_tol (relative
    to the matrix max-norm) or below.
    """
    h = require_hermitian(h)
    n = h.shape[0]
    if h.shape[1] != n:
        raise ValueError("square matrix required")
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 0.0)
    a = np.zeros((n, n), dtype=complex)
    work = h.astype(complex).copy()
    for k in range(n):
        pivot = work[k, k].real
        if pivot <= pivot_tol * scale:
            raise NotPositiveDefinite(f"pivot {pivot:.3e} at index {k}")
        d = np.sqrt(pivot)
        a[k:, k] = work[k:, k] / d
        a[k, k] = d
        # rank-one update of the trailing block
        col = a[k + 1:, k]
        work[k + 1:, k + 1:] -= np.outer(col, col.conj())
    return a


def upper_cholesky(h, pivot_tol: float = PIVOT_TOL) -> np.ndarray:
    """Upper triangular B with positive real diagonal and B B† = H."""
    h = as_complex_matrix(h)
    n = h.shape[0]
    j = reversal(n)
    a = lower_cholesky(j @ h @ j, pivot_tol=pivot_tol)
    return j @ a @ j


def min_cholesky_pivot(h) -> float:
    """Smallest pivot of the (unguarded) elimination; may be <= 0."""
    h = as_complex_matrix(h)
    n = h.shape[0]
    work = h.astype(complex).copy()
    smallest = np.inf
    for k in range(n):
        pivot = work[k, k].real
        smallest = min(smallest, pivot)
        if pivot <= 0.0:
            return float(smallest)
        col = work[k + 1:, k] / np.sqrt(pivot)
        work[k + 1:, k + 1:] -= np.outer(col, col.conj())
    return float(smallest) if n else np.inf


def spectral_norm(m) -> float:
    """Largest singular value via power iteration on M†M.

    Deterministic: all-ones start vector, iteration cap 500, relative
    tolerance 1e-12.
    """
    m = as_complex_matrix(m)
    if m.size == 0:
        return 0.0
    g = m.conj().T @ m
    n = g.shape[0]
    v = np.ones(n, dtype=complex) / np.sqrt(n)
    lam = 0.0
    for _ in range(_POWER_ITER_CAP):
        w = g @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v_new = w / norm
        lam_new = float((v_new.conj() @ g @ v_new).real)
        if abs(lam_new - lam) <= _POWER_ITER_RTOL * max(lam_new, 1e-300):
            lam = lam_new
            break
        lam, v = lam_new, v_new
    return float(np.sqrt(max(lam, 0.0)))


def is_strict_contraction(m, margin: float = CONTRACTION_MARGIN) -> bool:
    return spectral_norm(m) <= 1.0 - margin


def reversal(n: int) -> np.ndarray:
    """J: ones on the antidiagonal."""
    return np.fliplr(np.eye(n))


def centro_transpose_symmetric(m, tol: float = TOL_HERMITIAN) -> bool:
    """JMJ = M^T within tol (absolute, scaled by max-norm)."""
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("square matrix required")
    if m.size == 0:
        return True
    j = reversal(m.shape[0])
    scale = max(1.0, float(np.max(np.abs(m))))
    return float(np.max(np.abs(j @ m @ j - m.T))) <= tol * scale


def is_toeplitz(m, tol: float = TOL_HERMITIAN) -> bool:
    """Toeplitz test via centro-transpose symmetry of M and its truncation."""
    m = as_complex_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("square matrix required")
    if m.shape[0] <= 1:
        return True
    return centro_transpose_symmetric(m, tol) and centro_transpose_symmetric(
        m[:-1, :-1], tol
    )


def is_doubly_toeplitz(m, block_size: int, tol: float = TOL_HERMITIAN) -> bool:
    """Block Toeplitz with Toeplitz blocks, tested by the three centro conditions.

    The conditions: the full matrix, the matrix with the last block row and
    column removed, and the matrix with the last row and column of every
    block removed must all be centro-transpose symmetric.
    """
    m = as_complex_matrix(m)
    n = m.shape[0]
    if m.shape[1] != n or n % block_size:
        raise ValueError("matrix size must be a multiple of block_size")
    k = n // block_size
    if not centro_transpose_symmetric(m, tol):
        return False
    if k > 1:
        a1 = m[: n - block_size, : n - block_size]
        if not centro_transpose_symmetric(a1, tol):
            return False
    if block_size > 1:
        keep = [
            b * block_size + r for b in range(k) for r in range(block_size - 1)
        ]
        a2 = m[np.ix_(keep, keep)]
        if not centro_transpose_symmetric(a2, tol):
            return False
    return True


def selector_u(m: int) -> np.ndarray:
    """U_m = [0, I_m], shape m x (m+1)."""
    return np.hstack([np.zeros((m, 1)), np.eye(m)]).astype(complex)


def selector_u1(m: int) -> np.ndarray:
    """U^1_m = [I_m, 0], shape m x (m+1)."""
    return np.hstack([np.eye(m), np.zeros((m, 1))]).astype(complex)


def e1(n: int) -> np.ndarray:
    """First standard basis vector as an n x 1 column."""
    v = np.zeros((n, 1), dtype=complex)
    if n:
        v[0, 0] = 1.0
    return v


def elast(n: int) -> np.ndarray:
    """Last standard basis vector as an n x 1 column."""
    v = np.zeros((n, 1), dtype=complex)
    if n:
        v[-1, 0] = 1.0
    return v


def lex_revlex_permutation(n: int, m: int) -> np.ndarray:
    """P_rl mapping the descending lex monomial stack to the revlex stack.

    Lex stack is (z^n w^m, z^n w^{m-1}, ..., 1); revlex stack is
    (w^m z^n, w^m z^{n-1}, ..., 1).  P[revlex index, lex index] = 1.
    """
    size = (n + 1) * (m + 1)
    p = np.zeros((size, size))
    for a in range(n + 1):
        for b in range(m + 1):
            lex = a * (m + 1) + b
            rev = b * (n + 1) + a
            p[rev, lex] = 1.0
    return p.astype(complex)


def solve_upper(u: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve U x = b for upper triangular U (deterministic back substitution)."""
    return _solve_tri(u, b, lower=False)


def solve_lower(l: np.ndarray, b: np.ndarray) -> np.ndarray:
    return _solve_tri(l, b, lower=True)


def _solve_tri(t: np.ndarray, b: np.ndarray, lower: bool) -> np.ndarray:
    t = as_complex_matrix(t)
    b = np.array(b, dtype=complex)
    vec = b.ndim == 1
    if vec:
        b = b[:, None]
    n = t.shape[0]
    x = np.zeros_like(b)
    order = range(n) if lower else range(n - 1, -1, -1)
    for i in order:
        if lower:
            acc = b[i] - t[i, :i] @ x[:i]
        else:
            acc = b[i] - t[i, i + 1:] @ x[i + 1:]
        x[i] = acc / t[i, i]
    return x[:, 0] if vec else x
