"""Bivariate orthonormal polynomial families on the bicircle.

The level-(n, m) family in the lex ordering is the column vector
Phi_{n,m} = (phi^m, phi^{m-1}, ..., phi^0)^T whose row phi^l has leading
monomial z^n w^l with positive real leading coefficient and is
orthogonal to every lex-smaller monomial of the (n, m) window.  The
revlex families Phit_{n,m} = (phit^n, ..., phit^0)^T play the same role
with the variables interchanged; they are computed by running the lex
construction on the swapped moment table and transposing coefficient
grids.

Everything in this module is the brute-force path: families come
straight from a Cholesky factorization of the monomial Gram matrix, and
the recurrence coefficients are literal inner-product brackets.  The
recurrence-propagation path lives in the synthesis module; the two are
compared in tests.

Polynomials are dense coefficient grids c[i, j] = coefficient of
z^i w^j, evaluated by Horner in w inside Horner in z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple

import numpy as np

from . import linalg, moments as mo

RESIDUAL_SEED = 0x5EED


def poly_eval(grid: np.ndarray, z: complex, w: complex) -> complex:
    acc = 0.0 + 0j
    for row in grid[::-1]:
        inner = 0.0 + 0j
        for c in row[::-1]:
            inner = inner * w + c
        acc = acc * z + inner
    return acc


def reverse_grid(grid: np.ndarray) -> np.ndarray:
    """z^n w^m conj(p)(1/z, 1/w) for a grid of bidegree (n, m) = shape-1."""
    return np.conj(np.asarray(grid, dtype=complex)[::-1, ::-1])


def grid_as_dict(grid: np.ndarray) -> Dict[Tuple[int, int], complex]:
    out = {}
    for i in range(grid.shape[0]):
        for j in range(grid.shape[1]):
            if grid[i, j] != 0:
                out[(i, j)] = complex(grid[i, j])
    return out


@dataclass(frozen=True)
class VectorPolynomial:
    """A stacked family of bivariate polynomials at one level.

    rows has shape (height, n+1, m+1); for the lex ordering the height
    is m+1 and row r is phi^{m-r}; for revlex the height is n+1 and row
    r is phit^{n-r}.
    """

    n: int
    m: int
    ordering: str
    rows: np.ndarray

    @property
    def height(self) -> int:
        return self.rows.shape[0]

    def __call__(self, z: complex, w: complex) -> np.ndarray:
        """Column vector of the rows evaluated at (z, w)."""
        return np.array([poly_eval(g, z, w) for g in self.rows])

    def reversed(self) -> "VectorPolynomial":
        rev = np.array([reverse_grid(g) for g in self.rows])
        return VectorPolynomial(self.n, self.m, self.ordering, rev)

    def leading_matrix(self) -> np.ndarray:
        """Coefficient matrix of the top power of the outer variable.

        For lex rows this is the (m+1) x (m+1) matrix multiplying the
        stack (w^m, ..., 1)^T in the z^n coefficient; upper triangular
        with positive diagonal.  For revlex the roles swap.
        """
        if self.ordering == "lex":
            mat = np.zeros((self.height, self.m + 1), dtype=complex)
            for r in range(self.height):
                for c in range(self.m + 1):
                    mat[r, c] = self.rows[r][self.n, self.m - c]
            return mat
        mat = np.zeros((self.height, self.n + 1), dtype=complex)
        for r in range(self.height):
            for c in range(self.n + 1):
                mat[r, c] = self.rows[r][self.n - c, self.m]
        return mat

    def one_variable_coeffs(self) -> List[np.ndarray]:
        """Matrix coefficients in the outer variable.

        Lex: matrices L_0..L_n with Phi(z, w) = (sum_i L_i z^i)(w^m,...,1)^T.
        Revlex: matrices in w against the stack (z^n, ..., 1)^T.
        """
        out = []
        if self.ordering == "lex":
            for i in range(self.n + 1):
                mat = np.zeros((self.height, self.m + 1), dtype=complex)
                for r in range(self.height):
                    for c in range(self.m + 1):
                        mat[r, c] = self.rows[r][i, self.m - c]
                out.append(mat)
        else:
            for j in range(self.m + 1):
                mat = np.zeros((self.height, self.n + 1), dtype=complex)
                for r in range(self.height):
                    for c in range(self.n + 1):
                        mat[r, c] = self.rows[r][self.n - c, j]
                out.append(mat)
        return out

    def save(self, path) -> None:
        lines = [f"poly {self.n} {self.m} {self.height}"]
        for r in range(self.height):
            g = self.rows[r]
            for i in range(g.shape[0]):
                for j in range(g.shape[1]):
                    v = g[i, j]
                    if v != 0:
                        lines.append(
                            f"{r} {i} {j} "
                            f"{mo.FLOAT_FMT % v.real} {mo.FLOAT_FMT % v.imag}"
                        )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path, ordering: str = "lex") -> "VectorPolynomial":
        with open(path) as fh:
            raw = [ln.strip() for ln in fh if ln.strip()]
        if not raw or not raw[0].startswith("poly"):
            raise ValueError("missing `poly n m rows` header")
        _, n_s, m_s, h_s = raw[0].split()
        n, m, h = int(n_s), int(m_s), int(h_s)
        rows = np.zeros((h, n + 1, m + 1), dtype=complex)
        for ln in raw[1:]:
            r_s, i_s, j_s, re_s, im_s = ln.split()
            rows[int(r_s), int(i_s), int(j_s)] = complex(
                float(re_s), float(im_s)
            )
        return cls(n, m, ordering, rows)


# -- construction ----------------------------------------------------


def _gram_ascending_lex(moments: mo.MomentTable, n: int, m: int) -> np.ndarray:
    """Gram matrix of the monomials 1, w, ..., w^m, z, zw, ..., z^n w^m."""
    size = (n + 1) * (m + 1)
    g = np.zeros((size, size), dtype=complex)
    for i in range(size):
        ai, bi = divmod(i, m + 1)
        for j in range(size):
            aj, bj = divmod(j, m + 1)
            g[i, j] = moments.get(aj - ai, bj - bi)
    return g


def orthonormal_basis(moments: mo.MomentTable, n: int, m: int) -> np.ndarray:
    """Row k holds the ascending-lex coefficients of the k-th orthonormal
    polynomial of the (n, m) window; lower triangular with positive
    diagonal (each polynomial's leading coefficient).
    """
    g = _gram_ascending_lex(moments, n, m)
    a = linalg.lower_cholesky(g)
    return linalg.solve_lower(a, np.eye(g.shape[0], dtype=complex))


def phi_level(moments: mo.MomentTable, n: int, m: int) -> VectorPolynomial:
    basis = orthonormal_basis(moments, n, m)
    rows = np.zeros((m + 1, n + 1, m + 1), dtype=complex)
    for r in range(m + 1):
        l = m - r
        rows[r] = basis[n * (m + 1) + l].reshape(n + 1, m + 1)
    return VectorPolynomial(n, m, "lex", rows)


def phi_tilde_level(moments: mo.MomentTable, n: int, m: int) -> VectorPolynomial:
    swapped = phi_level(moments.swapped(), m, n)
    rows = np.transpose(swapped.rows, (0, 2, 1))
    return VectorPolynomial(n, m, "revlex", rows)


def gram_schmidt_levels(
    moments: mo.MomentTable, n_top: int, m_top: int
) -> Tuple[Dict[Tuple[int, int], VectorPolynomial], Dict[Tuple[int, int], VectorPolynomial]]:
    """All lex and revlex families for 0 <= n <= n_top, 0 <= m <= m_top.

    Raises NotPositiveDefinite when the top-level moment matrix is not
    positive definite.
    """
    phi: Dict[Tuple[int, int], VectorPolynomial] = {}
    phit: Dict[Tuple[int, int], VectorPolynomial] = {}
    for n in range(n_top + 1):
        for m in range(m_top + 1):
            phi[(n, m)] = phi_level(moments, n, m)
            phit[(n, m)] = phi_tilde_level(moments, n, m)
    return phi, phit


# -- inner products of families --------------------------------------


def vector_inner(
    moments: mo.MomentTable,
    p: VectorPolynomial,
    q: VectorPolynomial,
    p_shift: Tuple[int, int] = (0, 0),
    q_shift: Tuple[int, int] = (0, 0),
    p_reversed: bool = False,
    q_reversed: bool = False,
) -> np.ndarray:
    """Matrix of row-by-row inner products <p_r, q_s>.

    Shifts multiply by z^a w^b; the reversed flags substitute the
    reverse of each row first.
    """
    prows = p.reversed().rows if p_reversed else p.rows
    qrows = q.reversed().rows if q_reversed else q.rows
    out = np.zeros((prows.shape[0], qrows.shape[0]), dtype=complex)
    for r in range(prows.shape[0]):
        for s in range(qrows.shape[0]):
            out[r, s] = mo.grid_inner_product(
                moments, prows[r], qrows[s], p_shift, q_shift
            )
    return out


@dataclass
class LevelCoefficients:
    """The recurrence coefficient ensemble at one level (n, m).

    Shapes (lex half): ehat, a are (m+1) x (m+1); k, k1 are m x n;
    gamma, gamma1 are m x (m+1); imat, i1 are (m+1) x (n+1).  The tilde
    half holds the same data for the swapped-variable problem at the
    transposed level, so e.g. t_k is n x m.
    """

    n: int
    m: int
    ehat: np.ndarray
    a: np.ndarray
    k: np.ndarray
    gamma: np.ndarray
    k1: np.ndarray
    gamma1: np.ndarray
    imat: np.ndarray
    i1: np.ndarray
    t_ehat: np.ndarray = None
    t_a: np.ndarray = None
    t_k: np.ndarray = None
    t_gamma: np.ndarray = None
    t_k1: np.ndarray = None
    t_gamma1: np.ndarray = None
    t_imat: np.ndarray = None
    t_i1: np.ndarray = None


def _lex_coefficients(moments: mo.MomentTable, n: int, m: int) -> LevelCoefficients:
    here = phi_level(moments, n, m)
    here_t = phi_tilde_level(moments, n, m)
    if n > 0:
        left = phi_level(moments, n - 1, m)
        ehat = vector_inner(moments, left, left, p_shift=(1, 0), q_reversed=True)
        a = vector_inner(moments, left, here, p_shift=(1, 0))
        left_t = phi_tilde_level(moments, n - 1, m)
    else:
        ehat = np.zeros((m + 1, m + 1), dtype=complex)
        a = np.eye(m + 1, dtype=complex)
        left_t = None
    if m > 0:
        below = phi_level(moments, n, m - 1)
        gamma = vector_inner(moments, below, here)
        gamma1 = vector_inner(moments, below, here, p_shift=(0, 1))
        if n > 0:
            k = vector_inner(moments, below, left_t)
            k1 = vector_inner(
                moments, below, left_t, p_shift=(0, 1), q_reversed=True
            )
        else:
            k = np.zeros((m, 0), dtype=complex)
            k1 = np.zeros((m, 0), dtype=complex)
    else:
        gamma = np.zeros((0, 1), dtype=complex)
        gamma1 = np.zeros((0, 1), dtype=complex)
        k = np.zeros((0, n), dtype=complex)
        k1 = np.zeros((0, n), dtype=complex)
    imat = vector_inner(moments, here, here_t)
    i1 = vector_inner(moments, here, here_t, p_reversed=True)
    return LevelCoefficients(
        n=n, m=m, ehat=ehat, a=a, k=k, gamma=gamma, k1=k1, gamma1=gamma1,
        imat=imat, i1=i1,
    )


def coefficients_by_inner_product(
    moments: mo.MomentTable, n: int, m: int
) -> LevelCoefficients:
    """Full coefficient ensemble at level (n, m), tilde half included.

    Each entry is the literal defining inner product; the tilde half is
    computed on the swapped moment table at the transposed level.
    """
    lex = _lex_coefficients(moments, n, m)
    tl = _lex_coefficients(moments.swapped(), m, n)
    lex.t_ehat, lex.t_a = tl.ehat, tl.a
    lex.t_k, lex.t_gamma = tl.k, tl.gamma
    lex.t_k1, lex.t_gamma1 = tl.k1, tl.gamma1
    lex.t_imat, lex.t_i1 = tl.imat, tl.i1
    return lex


# -- verification ----------------------------------------------------


def sample_points(count: int, seed: int = RESIDUAL_SEED) -> List[Tuple[complex, complex]]:
    """Deterministic sample points: torus points and off-torus radii."""
    rng = np.random.default_rng(seed)
    pts = []
    for idx in range(count):
        tz, tw = rng.uniform(0, 2 * np.pi, size=2)
        if idx % 2:
            rz, rw = rng.uniform(0.5, 1.5, size=2)
        else:
            rz = rw = 1.0
        pts.append((rz * np.exp(1j * tz), rw * np.exp(1j * tw)))
    return pts


def _maxabs(arr) -> float:
    arr = np.atleast_1d(np.asarray(arr))
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def verify_recurrences(
    moments: mo.MomentTable,
    n: int,
    m: int,
    points: Iterable[Tuple[complex, complex]] | None = None,
) -> Dict[str, float]:
    """Max pointwise residuals of the six level recurrences (and their
    swapped-variable versions) at level (n, m).
    """
    if points is None:
        points = sample_points(8)
    points = list(points)
    report: Dict[str, float] = {}
    report.update(_lex_recurrence_residuals(moments, n, m, points))
    swapped_pts = [(w, z) for (z, w) in points]
    for key, val in _lex_recurrence_residuals(
        moments.swapped(), m, n, swapped_pts
    ).items():
        report["tilde_" + key] = val
    return report


def _lex_recurrence_residuals(moments, n, m, points) -> Dict[str, float]:
    coeffs = _lex_coefficients(moments, n, m)
    here = phi_level(moments, n, m)
    here_t = phi_tilde_level(moments, n, m)
    here_rev = here.reversed()
    out: Dict[str, float] = {}
    if n > 0:
        left = phi_level(moments, n - 1, m)
        left_rev = left.reversed()
        r_step = 0.0
        r_inv = 0.0
        for z, w in points:
            p, lp, lrev = here(z, w), left(z, w), left_rev(z, w)
            r_step = max(
                r_step, _maxabs(coeffs.a @ p - z * lp + coeffs.ehat @ lrev)
            )
            prev = here_rev(z, w)
            lhs = p + coeffs.a.conj().T @ coeffs.ehat @ np.linalg.solve(
                coeffs.a.T, prev
            )
            r_inv = max(r_inv, _maxabs(lhs - coeffs.a.conj().T @ (z * lp)))
        out["z_step"] = r_step
        out["z_step_inverse"] = r_inv
    if m > 0:
        below = phi_level(moments, n, m - 1)
        below_rev = below.reversed()
        r13 = r14 = r15 = r16 = 0.0
        for z, w in points:
            p, b = here(z, w), below(z, w)
            pt = here_t(z, w)
            if n > 0:
                lt = phi_tilde_level(moments, n - 1, m)
                ltv = lt(z, w)
                ltrev = lt.reversed()(z, w)
            else:
                ltv = np.zeros(0, dtype=complex)
                ltrev = np.zeros(0, dtype=complex)
            r13 = max(r13, _maxabs(coeffs.gamma @ p - b + coeffs.k @ ltv))
            r14 = max(
                r14, _maxabs(coeffs.gamma1 @ p - w * b + coeffs.k1 @ ltrev)
            )
            r15 = max(
                r15,
                _maxabs(
                    p - coeffs.imat @ pt - coeffs.gamma.conj().T @ b
                ),
            )
            r16 = max(
                r16,
                _maxabs(
                    here_rev(z, w)
                    - coeffs.i1 @ pt
                    - coeffs.gamma1.T @ below_rev(z, w)
                ),
            )
        out["w_drop"] = r13
        out["w_raise"] = r14
        out["ordering_mix"] = r15
        out["ordering_mix_reverse"] = r16
    return out


def verify_pointwise_formulas(
    moments: mo.MomentTable, n: int, m: int
) -> Dict[str, float]:
    """Residuals of the closed-form coefficient expressions at (n, m):
    the leading-matrix formulas for Gamma and Gamma1, the K and K1
    eliminations, the inverse-moment-matrix expressions for I and I1,
    the structural identities, and (when both indices are positive) the
    cross-level propagation identities.
    """
    c = coefficients_by_inner_product(moments, n, m)
    here = phi_level(moments, n, m)
    here_t = phi_tilde_level(moments, n, m)
    lead = here.leading_matrix()
    lead_t = here_t.leading_matrix()
    lead_inv = np.linalg.inv(lead)
    out: Dict[str, float] = {}
    if m > 0:
        below = phi_level(moments, n, m - 1)
        lead_b = below.leading_matrix()
        out["gamma_leading"] = _maxabs(
            c.gamma - lead_b @ linalg.selector_u(m) @ lead_inv
        )
        out["gamma1_leading"] = _maxabs(
            c.gamma1 - lead_b @ linalg.selector_u1(m) @ lead_inv
        )
    if n > 0 and m > 0:
        lt = phi_tilde_level(moments, n - 1, m)
        lead_lt = lt.leading_matrix()
        f = lead_t @ linalg.selector_u(n).T @ np.linalg.inv(lead_lt)
        f1 = lead_t @ linalg.selector_u1(n).T @ np.linalg.inv(lead_lt)
        out["k_elimination"] = _maxabs(c.k + c.gamma @ c.imat @ f)
        out["k1_elimination"] = _maxabs(
            c.k1 + c.gamma1 @ np.conj(c.i1) @ np.conj(f1)
        )
    cmat = mo.assemble(moments, n, m)
    cinv = np.linalg.inv(cmat)
    size = (n + 1) * (m + 1)
    sel_m = np.zeros((m + 1, size), dtype=complex)
    sel_m[:, : m + 1] = np.eye(m + 1)
    sel_m_last = np.zeros((m + 1, size), dtype=complex)
    sel_m_last[:, size - (m + 1):] = linalg.reversal(m + 1)
    sel_n = np.zeros((size, n + 1), dtype=complex)
    sel_n[: n + 1, :] = np.eye(n + 1)
    prl = linalg.lex_revlex_permutation(n, m)
    core = cinv @ prl.T @ sel_n @ np.linalg.inv(lead_t)
    out["imat_inverse_moment"] = _maxabs(
        c.imat - np.linalg.inv(lead.conj().T) @ sel_m @ core
    )
    out["i1_inverse_moment"] = _maxabs(
        c.i1 - np.linalg.inv(lead.T) @ sel_m_last @ core
    )
    out.update(_structural_residuals(c))
    if n > 0 and m > 0:
        out.update(_cross_level_residuals(moments, n, m))
    return out


def _structural_residuals(c: LevelCoefficients) -> Dict[str, float]:
    m1 = c.m + 1
    out = {
        "ehat_symmetric": _maxabs(c.ehat - c.ehat.T),
        "a_unitary_defect": _maxabs(
            c.a @ c.a.conj().T - np.eye(m1) + c.ehat @ c.ehat.conj().T
        ),
        "gamma_pythagoras": _maxabs(
            c.gamma @ c.gamma.conj().T - np.eye(c.m) + c.k @ c.k.conj().T
        ),
        "gamma1_pythagoras": _maxabs(
            c.gamma1 @ c.gamma1.conj().T - np.eye(c.m) + c.k1 @ c.k1.conj().T
        ),
        "imat_pythagoras": _maxabs(
            c.imat @ c.imat.conj().T
            + c.gamma.conj().T @ c.gamma
            - np.eye(m1)
        ),
        # this relation holds with entrywise conjugates on both products
        "i1_pythagoras": _maxabs(
            c.i1 @ np.conj(c.i1).T
            + c.gamma1.T @ np.conj(c.gamma1)
            - np.eye(m1)
        ),
        "k_duality": _maxabs(c.t_k - c.k.conj().T),
        "imat_duality": _maxabs(c.t_imat - c.imat.conj().T),
        "i1_duality": _maxabs(c.t_i1 - c.i1.T),
        "k1_duality": _maxabs(c.t_k1 - c.k1.T),
    }
    return out


def _cross_level_residuals(moments, n, m) -> Dict[str, float]:
    c = coefficients_by_inner_product(moments, n, m)
    cw = coefficients_by_inner_product(moments, n, m - 1)
    cz = coefficients_by_inner_product(moments, n - 1, m)
    ta_inv = np.linalg.inv(cz.t_a)
    out = {
        "k_from_below": _maxabs(
            cw.gamma1 @ c.k
            - cw.k @ ta_inv.conj().T
            + cw.k1 @ cz.t_ehat.conj().T @ ta_inv.conj().T
        ),
        "k_from_left": _maxabs(
            c.k @ cz.t_gamma1.conj().T
            - np.linalg.solve(cw.a, cz.k - cw.ehat @ np.conj(cz.k1))
        ),
        "k1_from_below": _maxabs(
            cw.gamma @ c.k1
            - cw.k1 @ ta_inv.T
            + cw.k @ cz.t_ehat @ ta_inv.T
        ),
        "k1_from_left": _maxabs(
            c.k1 @ cz.t_gamma.T
            - np.linalg.solve(cw.a, cz.k1 - cw.ehat @ np.conj(cz.k))
        ),
        "ehat_from_below": _maxabs(
            cz.gamma @ c.ehat
            - cw.a @ c.k @ cz.i1.conj().T
            - cw.ehat @ np.conj(cz.gamma1)
        ),
        "ehat_from_left": _maxabs(
            c.ehat @ cz.gamma1.T
            - cz.imat @ c.k1.T @ cw.a.T
            - cz.gamma.conj().T @ cw.ehat
        ),
        "gamma1_cross": _maxabs(
            c.gamma1 @ c.gamma.conj().T
            - cw.imat @ c.t_ehat @ cw.i1.T
            - cw.gamma.conj().T @ cw.gamma1
            - c.k1
            @ np.linalg.inv(np.conj(cz.t_a))
            @ cz.t_ehat.conj().T
            @ cz.t_a
            @ c.k.conj().T
        ),
        "imat_gamma_coupling": _maxabs(
            c.imat @ c.t_gamma.conj().T + c.gamma.conj().T @ c.k
        ),
        "i1_propagation": _maxabs(
            c.i1
            + np.linalg.inv(np.conj(c.a)) @ c.ehat.conj().T @ c.a @ c.imat
            - c.a.T @ cz.i1 @ c.t_gamma
        ),
    }
    return out


def christoffel_darboux_residual(
    moments: mo.MomentTable,
    n: int,
    m: int,
    z: complex,
    w: complex,
    z1: complex,
    w1: complex,
) -> float:
    """Max residual over the reproducing-kernel identities at (n, m).

    Compares the one-step quotient form against the lex level sum, the
    revlex level sum, the direct monomial kernel Z C^{-1} Z*, the
    three-way single-step equalities, and the two-level difference
    identity.  All are scalars for fixed evaluation points; the points
    need not lie on the torus.
    """

    def corr(vp: VectorPolynomial) -> complex:
        return complex(vp(z, w) @ np.conj(vp(z1, w1)))

    def body(nn: int, mm: int) -> complex:
        vp = phi_level(moments, nn, mm)
        rev = vp.reversed()
        return complex(
            rev(z, w) @ np.conj(rev(z1, w1))
            - np.conj(z1) * z * corr(vp)
        )

    denom = 1.0 - np.conj(z1) * z
    sum_lex = sum(corr(phi_level(moments, k, m)) for k in range(n + 1))
    sum_rev = sum(
        corr(phi_tilde_level(moments, n, j)) for j in range(m + 1)
    )
    mono = np.array(
        [z ** a * w ** b for a, b in mo.lex_monomials(n, m)]
    )
    mono1 = np.array(
        [z1 ** a * w1 ** b for a, b in mo.lex_monomials(n, m)]
    )
    kernel = complex(
        np.conj(mono1) @ np.linalg.inv(mo.assemble(moments, n, m)) @ mono
    )
    residuals = [
        abs(body(n, m) / denom - sum_lex),
        abs(sum_lex - sum_rev),
        abs(sum_lex - kernel),
    ]
    if n > 0:
        residuals.append(
            abs(
                body(n, m)
                - denom * corr(phi_level(moments, n, m))
                - body(n - 1, m)
            )
        )
    if m > 0:
        residuals.append(
            abs(
                body(n, m)
                - denom * corr(phi_tilde_level(moments, n, m))
                - body(n, m - 1)
            )
        )
    if n > 0 and m > 0:
        lhs = corr(phi_level(moments, n, m)) - corr(
            phi_level(moments, n, m - 1)
        )
        rhs = corr(phi_tilde_level(moments, n, m)) - corr(
            phi_tilde_level(moments, n - 1, m)
        )
        residuals.append(abs(lhs - rhs))
    return max(residuals)
