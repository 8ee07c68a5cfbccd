"""Matrix orthogonal polynomials on the unit circle.

A doubly Toeplitz moment matrix at height m gives a matrix-valued
functional on (m+1) x (m+1) matrix polynomials through its Toeplitz
blocks: the pairing of z^a against z^b is the block C_{b-a} with
(C_k)[r, s] = c_{k, r-s}.  The Levinson recursion produces the left and
right orthonormal matrix polynomials L_i, R_i, the strictly contractive
reflection coefficients E_i, and the normalization factors A_i
(upper Cholesky of I - E E*) and Ahat_i (conjugate of the lower
Cholesky of I - E* E).  Uniqueness is fixed by upper triangular leading
coefficients with positive diagonal.

The reverse of a degree-n matrix polynomial B is z^n B(1/conj(z))*.
Reverses of the orthonormal polynomials are stable (no zeros in the
closed disk), which powers the spectral factorization routine:
a positive definite matrix trig polynomial Q equals revL revL* where
revL comes from running the recursion on the Fourier coefficients of
Q^{-1} (the maximum entropy construction).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import linalg


class NotStrictlyPositive(ValueError):
    """A matrix density failed strict positive definiteness on the grid."""


@dataclass(frozen=True)
class MatrixPolynomial:
    """Dense matrix polynomial sum_a coeffs[a] z^a."""

    coeffs: Tuple[np.ndarray, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def size(self) -> int:
        return self.coeffs[0].shape[0]

    def __call__(self, z: complex) -> np.ndarray:
        acc = np.zeros_like(self.coeffs[0])
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def reverse(self) -> "MatrixPolynomial":
        rev = tuple(c.conj().T for c in self.coeffs[::-1])
        return MatrixPolynomial(rev)

    def shift(self) -> "MatrixPolynomial":
        """Multiply by z."""
        zero = np.zeros_like(self.coeffs[0])
        return MatrixPolynomial((zero,) + self.coeffs)

    def unshift(self) -> "MatrixPolynomial":
        """Divide by z; the constant coefficient must vanish."""
        if float(np.max(np.abs(self.coeffs[0]))) > 1e-8:
            raise ValueError("constant term does not vanish")
        return MatrixPolynomial(self.coeffs[1:])


def make_poly(coeffs: Sequence[np.ndarray]) -> MatrixPolynomial:
    return MatrixPolynomial(tuple(np.array(c, dtype=complex) for c in coeffs))


def block_functional(
    blocks: Dict[int, np.ndarray], p: MatrixPolynomial, q: MatrixPolynomial
) -> np.ndarray:
    """Pairing sum_{a,b} P_a C_{b-a} Q_b* over the Toeplitz blocks."""
    size = p.size
    out = np.zeros((size, size), dtype=complex)
    for a, pa in enumerate(p.coeffs):
        for b, qb in enumerate(q.coeffs):
            out += pa @ blocks[b - a] @ qb.conj().T
    return out


def right_pairing(
    blocks: Dict[int, np.ndarray], p: MatrixPolynomial, q: MatrixPolynomial
) -> np.ndarray:
    """Pairing sum_{a,b} P_a* C_{a-b} Q_b, the one the right family is
    orthonormal under."""
    size = p.size
    out = np.zeros((size, size), dtype=complex)
    for a, pa in enumerate(p.coeffs):
        for b, qb in enumerate(q.coeffs):
            out += pa.conj().T @ blocks[a - b] @ qb
    return out


def blocks_from_moments(moments, n: int, m: int) -> Dict[int, np.ndarray]:
    """Toeplitz blocks C_{-n}..C_n of height m from a moment table."""
    blocks = {}
    for k in range(-n, n + 1):
        b = np.zeros((m + 1, m + 1), dtype=complex)
        for r in range(m + 1):
            for s in range(m + 1):
                b[r, s] = moments.get(k, r - s)
        blocks[k] = b
    return blocks


@dataclass
class OpucSequence:
    """Levels 0..n of the matrix orthonormal polynomial recursion.

    reflections[i] is the coefficient consumed going from level i-1 to
    level i (reflections[0] is None), and likewise for the a / ahat
    normalization factors.
    """

    blocks: Dict[int, np.ndarray]
    left: List[MatrixPolynomial] = field(default_factory=list)
    right: List[MatrixPolynomial] = field(default_factory=list)
    reflections: List[np.ndarray | None] = field(default_factory=list)
    a: List[np.ndarray | None] = field(default_factory=list)
    ahat: List[np.ndarray | None] = field(default_factory=list)

    @property
    def top(self) -> int:
        return len(self.left) - 1


def levinson(blocks: Dict[int, np.ndarray], n: int) -> OpucSequence:
    """Run the recursion up to degree n.

    Raises NotPositiveDefinite when C_0 or some I - E E* loses
    definiteness (equivalently the stacked Toeplitz matrix is not PD).
    """
    c0 = linalg.require_hermitian(blocks[0])
    size = c0.shape[0]
    l0 = linalg.solve_upper(
        linalg.upper_cholesky(c0), np.eye(size, dtype=complex)
    )
    r0 = linalg.solve_lower(
        linalg.lower_cholesky(c0), np.eye(size, dtype=complex)
    ).conj().T
    seq = OpucSequence(
        blocks=blocks,
        left=[make_poly([l0])],
        right=[make_poly([r0])],
        reflections=[None],
        a=[None],
        ahat=[None],
    )
    eye = np.eye(size, dtype=complex)
    for i in range(n):
        li, ri = seq.left[i], seq.right[i]
        zl = li.shift()
        e = block_functional(blocks, zl, ri.reverse())
        a = linalg.upper_cholesky(eye - e @ e.conj().T)
        ahat = linalg.lower_cholesky(eye - e.conj().T @ e).conj().T
        rev_r = ri.reverse()
        l_next = make_poly(
            [
                np.linalg.solve(a, zl.coeffs[k] - e @ rev_r.coeffs[k])
                if k < len(rev_r.coeffs)
                else np.linalg.solve(a, zl.coeffs[k])
                for k in range(i + 2)
            ]
        )
        rev_l = li.reverse()
        zr = ri.shift()
        r_next = make_poly(
            [
                (zr.coeffs[k] - rev_l.coeffs[k] @ e)
                if k < len(rev_l.coeffs)
                else zr.coeffs[k]
                for k in range(i + 2)
            ]
        )
        ahat_inv = np.linalg.inv(ahat)
        r_next = make_poly([c @ ahat_inv for c in r_next.coeffs])
        seq.left.append(l_next)
        seq.right.append(r_next)
        seq.reflections.append(e)
        seq.a.append(a)
        seq.ahat.append(ahat)
    return seq


def cholesky_stack(seq: OpucSequence) -> np.ndarray:
    """The block upper triangular stack L with L* L = C^{-1}.

    Row block k holds the coefficients of the degree-(n-k) left
    polynomial against the descending monomial stack.
    """
    n = seq.top
    size = seq.blocks[0].shape[0]
    total = (n + 1) * size
    l = np.zeros((total, total), dtype=complex)
    for k in range(n + 1):
        poly = seq.left[n - k]
        for a, coeff in enumerate(poly.coeffs):
            col = (n - a) * size
            l[k * size:(k + 1) * size, col: col + size] = coeff
    return l


def inverse_step(
    l_next: MatrixPolynomial,
    r_next: MatrixPolynomial,
    e: np.ndarray,
    a: np.ndarray,
    ahat: np.ndarray,
) -> Tuple[MatrixPolynomial, MatrixPolynomial]:
    """Recover the level-i polynomials from level i+1 and its coefficients."""
    rev_r = r_next.reverse()
    zl = make_poly(
        [
            np.linalg.solve(a.conj().T, c) + e @ np.linalg.solve(ahat, rc)
            for c, rc in zip(l_next.coeffs, rev_r.coeffs)
        ]
    )
    rev_l = l_next.reverse()
    ahat_ct_inv = np.linalg.inv(ahat.conj().T)
    a_inv_e = np.linalg.solve(a, e)
    zr = make_poly(
        [
            c @ ahat_ct_inv + rc @ a_inv_e
            for c, rc in zip(r_next.coeffs, rev_l.coeffs)
        ]
    )
    return zl.unshift(), zr.unshift()


def reflection_from_boundary(
    l_next: MatrixPolynomial,
    r_next: MatrixPolynomial,
    a: np.ndarray,
    ahat: np.ndarray,
) -> np.ndarray:
    """Reflection coefficient from the values at the origin."""
    rev_r0 = r_next.reverse()(0.0)
    return -np.linalg.solve(
        a.conj().T, l_next(0.0) @ np.linalg.solve(rev_r0, ahat)
    )


def cd_residual(seq: OpucSequence, k: int, z: complex, z1: complex) -> float:
    """Max residual of the two one-variable reproducing-kernel identities."""
    lk, rk = seq.left[k], seq.right[k]
    rev_r, rev_l = rk.reverse(), lk.reverse()
    factor = 1.0 - np.conj(z) * z1
    lhs1 = rev_r(z).conj().T @ rev_r(z1) - np.conj(z) * z1 * lk(
        z
    ).conj().T @ lk(z1)
    rhs1 = factor * sum(
        seq.left[i](z).conj().T @ seq.left[i](z1) for i in range(k + 1)
    )
    lhs2 = rev_l(z1) @ rev_l(z).conj().T - np.conj(z) * z1 * rk(z1) @ rk(
        z
    ).conj().T
    rhs2 = factor * sum(
        seq.right[i](z1) @ seq.right[i](z).conj().T for i in range(k + 1)
    )
    return max(
        float(np.max(np.abs(lhs1 - rhs1))), float(np.max(np.abs(lhs2 - rhs2)))
    )


def spectral_matching_check(
    seq: OpucSequence, k: int | None = None, grid: int = 512
) -> Dict[str, float]:
    """Fourier-coefficient match of W = [revL revL*]^{-1} against the blocks.

    Also reports the max pointwise difference between the left and
    right expressions for W.
    """
    if k is None:
        k = seq.top
    rev_l = seq.left[k].reverse()
    rev_r = seq.right[k].reverse()
    size = seq.blocks[0].shape[0]
    theta = 2 * np.pi * np.arange(grid) / grid
    w_samples = np.zeros((grid, size, size), dtype=complex)
    two_sided = 0.0
    for t, th in enumerate(theta):
        z = np.exp(1j * th)
        vl = rev_l(z)
        w = np.linalg.inv(vl @ vl.conj().T)
        vr = rev_r(z)
        w2 = np.linalg.inv(vr.conj().T @ vr)
        two_sided = max(two_sided, float(np.max(np.abs(w - w2))))
        w_samples[t] = w
    coeffs = np.fft.fft(w_samples, axis=0) / grid
    match = 0.0
    for j in range(-k, k + 1):
        match = max(
            match, float(np.max(np.abs(coeffs[j % grid] - seq.blocks[j])))
        )
    return {"match": match, "two_sided": two_sided}


def is_stable(
    p: MatrixPolynomial, radial: int = 64, angular: int = 64
) -> bool:
    """No zeros of det p on the closed unit disk.

    Checks the minimum of |det| on a polar grid and confirms with the
    winding number of det around the unit circle (zero for a
    nonvanishing analytic determinant).
    """
    radii = np.linspace(0.0, 1.0, radial)
    angles = 2 * np.pi * np.arange(angular) / angular
    for r in radii:
        for th in angles:
            if abs(np.linalg.det(p(r * np.exp(1j * th)))) < 1e-12:
                return False
    samples = np.array(
        [
            np.linalg.det(p(np.exp(2j * np.pi * t / 256)))
            for t in range(257)
        ]
    )
    phases = np.angle(samples[1:] / samples[:-1])
    winding = float(np.sum(phases)) / (2 * np.pi)
    return abs(winding) < 0.5


def det_identity_residual(seq: OpucSequence, k: int) -> float:
    """Relative error of the determinant product formula at level k."""
    lead = seq.left[k].coeffs[k]
    lhs = 1.0 / np.linalg.det(lead.conj().T @ lead).real
    rhs = np.linalg.det(seq.blocks[0]).real
    for j in range(1, k + 1):
        e = seq.reflections[j]
        rhs *= np.linalg.det(
            np.eye(e.shape[0]) - e @ e.conj().T
        ).real
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def entropy_residual(seq: OpucSequence, k: int, grid: int = 1024) -> float:
    """Difference between log det of the normalization and the average
    log-determinant of the matched density."""
    lead = seq.left[k].coeffs[k]
    lhs = -float(np.log(np.linalg.det(lead.conj().T @ lead).real))
    rev_l = seq.left[k].reverse()
    acc = 0.0
    for t in range(grid):
        z = np.exp(2j * np.pi * t / grid)
        v = rev_l(z)
        acc -= float(np.log(np.linalg.det(v @ v.conj().T).real))
    return abs(lhs - acc / grid)


def monotonicity_defect(seq: OpucSequence) -> float:
    """Largest violation of the decreasing prediction-error ordering.

    The error matrices (lead* lead)^{-1} for the left family and
    (lead lead*)^{-1} for the right family must each be nonincreasing
    in the positive semidefinite order; returns the most negative
    eigenvalue seen across consecutive levels (0.0 when clean).
    """
    worst = 0.0
    for k in range(seq.top):
        lk = seq.left[k].coeffs[k]
        lk1 = seq.left[k + 1].coeffs[k + 1]
        d = np.linalg.inv(lk.conj().T @ lk) - np.linalg.inv(
            lk1.conj().T @ lk1
        )
        worst = max(worst, -float(np.min(np.linalg.eigvalsh(d))))
        rk = seq.right[k].coeffs[k]
        rk1 = seq.right[k + 1].coeffs[k + 1]
        d = np.linalg.inv(rk @ rk.conj().T) - np.linalg.inv(
            rk1 @ rk1.conj().T
        )
        worst = max(worst, -float(np.min(np.linalg.eigvalsh(d))))
    return worst


def centro_symmetry_report(seq: OpucSequence) -> Dict[str, float]:
    """Doubly Toeplitz inputs force a reversal symmetry: each reflection
    coefficient satisfies J E J = E^T and J L(z) J = R(z)^T pointwise.
    """
    size = seq.blocks[0].shape[0]
    j = linalg.reversal(size)
    refl = 0.0
    for e in seq.reflections[1:]:
        refl = max(refl, float(np.max(np.abs(j @ e @ j - e.T))))
    pointwise = 0.0
    for z in [1.0, -1.0, np.exp(0.7j), 0.4 + 0.2j, 1.3j]:
        for k in range(seq.top + 1):
            pointwise = max(
                pointwise,
                float(
                    np.max(
                        np.abs(
                            j @ seq.left[k](z) @ j - seq.right[k](z).T
                        )
                    )
                ),
            )
    return {"reflection_centro": refl, "left_right_transpose": pointwise}


# -- spectral factorization ------------------------------------------


def trig_poly_blocks(
    samples: np.ndarray, degree: int
) -> Dict[int, np.ndarray]:
    """Fourier coefficient matrices -degree..degree of sampled data."""
    grid = samples.shape[0]
    coeffs = np.fft.fft(samples, axis=0) / grid
    return {j: coeffs[j % grid] for j in range(-degree, degree + 1)}


def matrix_fejer_riesz(
    q_blocks: Dict[int, np.ndarray],
    degree: int,
    grid: int = 512,
    regularize: bool = True,
) -> Tuple[MatrixPolynomial, float]:
    """Factor a positive definite matrix trig polynomial.

    Q(theta) = sum_{|j|<=degree} Q_j e^{i j theta} with Q_{-j} = Q_j*
    is factored as revL revL* with revL stable of degree `degree`.  The
    recursion runs on the Fourier coefficients of Q^{-1}.  When Q is
    only semidefinite (or numerically so), a ridge of size 1e-8 * max
    |Q| is added first; the ridge actually used is returned alongside
    the factor (0.0 when none was needed).
    """
    size = q_blocks[0].shape[0]
    theta = 2 * np.pi * np.arange(grid) / grid
    q_vals = np.zeros((grid, size, size), dtype=complex)
    for t, th in enumerate(theta):
        acc = np.zeros((size, size), dtype=complex)
        for j, blk in q_blocks.items():
            acc += blk * np.exp(1j * j * th)
        q_vals[t] = acc
    min_eig = min(
        float(np.min(np.linalg.eigvalsh(0.5 * (v + v.conj().T))))
        for v in q_vals
    )
    scale = float(max(np.max(np.abs(v)) for v in q_vals))
    eps = 0.0
    if min_eig <= 1e-12 * max(scale, 1.0):
        if not regularize:
            raise NotStrictlyPositive(
                f"minimum eigenvalue {min_eig:.3e} on the check grid"
            )
        eps = 1e-8 * max(scale, 1.0)
        q_vals = q_vals + eps * np.eye(size)
        min_eig += eps
        if min_eig <= 0.0:
            raise NotStrictlyPositive(
                f"minimum eigenvalue {min_eig:.3e} even after ridge"
            )
    inv_vals = np.array([np.linalg.inv(v) for v in q_vals])
    blocks = trig_poly_blocks(inv_vals, degree)
    seq = levinson(blocks, degree)
    return seq.left[degree].reverse(), eps
