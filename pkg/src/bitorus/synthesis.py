"""Level-by-level synthesis of a positive functional from free parameters.

The parameter grid u_{i,j} (0 <= i <= N, |j| <= M, with the symmetry
u_{-i,-j} = conj(u_{i,j})) drives an induction over levels: the axes
carry one-variable reflection coefficients, and each interior level
(n, m) consumes the two new parameters u_{n,m} and u_{-n,m} to build
K_{n,m} and K1_{n,m}, from which every other coefficient at the level
follows.  Two new moments (c_{-n,m} and c_{n,m}) are solved for along
the way, so a successful run reconstructs a full moment table whose
doubly Toeplitz matrices are positive definite at every level.

The recursion is run simultaneously on the primary problem and on its
mirror (variables swapped); the mirror's quantities at level (m, n) are
exactly the tilde quantities of the primary at (n, m), which keeps the
code free of duplicated tilde formulas.

Polynomials are propagated by the level recurrences themselves, not by
Gram-Schmidt on the reconstructed matrix; the brute-force families
provide an independent cross-check in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import bipoly, linalg, moments as mo

MARGIN = 1e-10
SOLVE_GUARD = 1e-14
CONSISTENCY_TOL = 1e-6


class Inadmissible(ValueError):
    """A parameter grid fails the strict admissibility inequalities."""

    def __init__(self, level: Tuple[int, int], condition: str, value: float):
        self.level = level
        self.condition = condition
        self.value = value
        super().__init__(
            f"level {level}: {condition} violated (value {value:.6g})"
        )


@dataclass
class ParameterGrid:
    """Free parameters u_{i,j}; stored for i > 0 (any j) and i = 0, j >= 0.

    The remaining entries follow from u_{-i,-j} = conj(u_{i,j}).
    """

    n_top: int
    m_top: int
    u: Dict[Tuple[int, int], complex] = field(default_factory=dict)

    def get(self, i: int, j: int) -> complex:
        if i < 0 or (i == 0 and j < 0):
            return np.conj(self.get(-i, -j))
        return complex(self.u.get((i, j), 0.0))

    def set(self, i: int, j: int, value: complex) -> None:
        if i < 0 or (i == 0 and j < 0):
            self.set(-i, -j, np.conj(value))
            return
        if i > self.n_top or abs(j) > self.m_top:
            raise ValueError(f"parameter index ({i},{j}) outside grid")
        if (i, j) == (0, 0):
            value = complex(value).real
        self.u[(i, j)] = complex(value)

    def swapped(self) -> "ParameterGrid":
        out = ParameterGrid(self.m_top, self.n_top)
        for (i, j), v in self.u.items():
            if j >= 0:
                out.u[(j, i)] = v
            else:
                out.u[(-j, -i)] = np.conj(v)
        return out

    @classmethod
    def delta(cls, n_top: int, m_top: int) -> "ParameterGrid":
        g = cls(n_top, m_top)
        g.set(0, 0, 1.0)
        return g

    def save(self, path) -> None:
        lines = [f"params {self.n_top} {self.m_top}"]
        for (i, j) in sorted(self.u):
            v = self.u[(i, j)]
            lines.append(
                f"{i} {j} {mo.FLOAT_FMT % v.real} {mo.FLOAT_FMT % v.imag}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "ParameterGrid":
        with open(path) as fh:
            raw = [ln.strip() for ln in fh if ln.strip()]
        if not raw or not raw[0].startswith("params"):
            raise ValueError("missing `params N M` header")
        _, n_s, m_s = raw[0].split()
        g = cls(int(n_s), int(m_s))
        for ln in raw[1:]:
            i_s, j_s, re_s, im_s = ln.split()
            g.set(int(i_s), int(j_s), complex(float(re_s), float(im_s)))
        return g


@dataclass
class AdmissibilityRecord:
    level: Tuple[int, int]
    condition: str
    value: float
    bound: float
    ok: bool


@dataclass
class AdmissibilityReport:
    records: List[AdmissibilityRecord] = field(default_factory=list)
    ok: bool = True
    first_failure: Optional[AdmissibilityRecord] = None

    def add(self, level, condition, value, bound, margin) -> bool:
        ok = value < bound - margin
        rec = AdmissibilityRecord(level, condition, float(value), bound, ok)
        self.records.append(rec)
        if not ok and self.first_failure is None:
            self.ok = False
            self.first_failure = rec
        return ok


@dataclass
class LevelHalf:
    """One orientation's data at one level."""

    ehat: Optional[np.ndarray]
    a: Optional[np.ndarray]
    k: np.ndarray
    gamma: np.ndarray
    k1: np.ndarray
    gamma1: np.ndarray
    gamma_hat: Optional[np.ndarray]
    imat: np.ndarray
    i1: np.ndarray
    phi: bipoly.VectorPolynomial
    lead: np.ndarray


class _SwappedTable:
    """Index-swapping facade over a moment table."""

    def __init__(self, table: mo.MomentTable):
        self._t = table

    def get(self, i: int, j: int) -> complex:
        return self._t.get(j, i)


def _force_moment(table: mo.MomentTable, i: int, j: int, value: complex) -> None:
    value = complex(value)
    table._values[(i, j)] = value
    table._values[(-i, -j)] = value.conjugate()


def _pad(grid: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    out = np.zeros(shape, dtype=complex)
    out[: grid.shape[0], : grid.shape[1]] = grid
    return out


def _transpose_vp(vp: bipoly.VectorPolynomial) -> bipoly.VectorPolynomial:
    ordering = "revlex" if vp.ordering == "lex" else "lex"
    rows = np.transpose(vp.rows, (0, 2, 1))
    return bipoly.VectorPolynomial(vp.m, vp.n, ordering, rows)


def _solve_tri_right(b: np.ndarray, t: np.ndarray, lower: bool) -> np.ndarray:
    """X with X T = B for triangular T."""
    if lower:
        return linalg.solve_upper(t.T, b.T).T
    return linalg.solve_lower(t.T, b.T).T


@dataclass
class SynthesisState:
    params: ParameterGrid
    table: mo.MomentTable
    primary: Dict[Tuple[int, int], LevelHalf]
    mirror: Dict[Tuple[int, int], LevelHalf]
    report: AdmissibilityReport
    diagnostics: Dict[str, float]

    def phi(self, n: int, m: int) -> bipoly.VectorPolynomial:
        return self.primary[(n, m)].phi

    def phi_tilde(self, n: int, m: int) -> bipoly.VectorPolynomial:
        return _transpose_vp(self.mirror[(m, n)].phi)

    def coefficients(self, n: int, m: int) -> bipoly.LevelCoefficients:
        p = self.primary[(n, m)]
        q = self.mirror[(m, n)]
        return bipoly.LevelCoefficients(
            n=n, m=m, ehat=p.ehat, a=p.a, k=p.k, gamma=p.gamma, k1=p.k1,
            gamma1=p.gamma1, imat=p.imat, i1=p.i1,
            t_ehat=q.ehat, t_a=q.a, t_k=q.k, t_gamma=q.gamma, t_k1=q.k1,
            t_gamma1=q.gamma1, t_imat=q.imat, t_i1=q.i1,
        )


class _Synthesizer:
    def __init__(self, params: ParameterGrid, margin: float = MARGIN):
        self.params = params
        self.margin = margin
        self.n_top = params.n_top
        self.m_top = params.m_top
        self.table = mo.MomentTable(self.n_top, self.m_top)
        self.primary: Dict[Tuple[int, int], LevelHalf] = {}
        self.mirror: Dict[Tuple[int, int], LevelHalf] = {}
        self.report = AdmissibilityReport()
        self.diag: Dict[str, float] = {}

    def _note(self, key: str, value: float) -> None:
        self.diag[key] = max(self.diag.get(key, 0.0), float(value))

    def _gate(self, level, condition, value, bound=1.0) -> None:
        if not self.report.add(level, condition, value, bound, self.margin):
            raise Inadmissible(level, condition, value)

    def run(self) -> SynthesisState:
        u00 = self.params.get(0, 0)
        if abs(u00.imag) > 0:
            raise ValueError("u_{0,0} must be real")
        self._gate((0, 0), "u00_positive", -u00.real, 0.0)
        _force_moment(self.table, 0, 0, u00.real)
        self._level_00()
        for i in range(1, self.n_top + 1):
            self._axis_level("primary", i)
        for j in range(1, self.m_top + 1):
            self._axis_level("mirror", j)
        for n in range(1, self.n_top + 1):
            for m in range(1, self.m_top + 1):
                self._interior_level(n, m)
        return SynthesisState(
            params=self.params, table=self.table, primary=self.primary,
            mirror=self.mirror, report=self.report, diagnostics=self.diag,
        )

    # -- level (0,0) -------------------------------------------------

    def _level_00(self) -> None:
        root = 1.0 / np.sqrt(self.params.get(0, 0).real)
        grid = np.array([[root]], dtype=complex)
        for store in (self.primary, self.mirror):
            store[(0, 0)] = LevelHalf(
                ehat=None, a=None,
                k=np.zeros((0, 0), dtype=complex),
                gamma=np.zeros((0, 1), dtype=complex),
                k1=np.zeros((0, 0), dtype=complex),
                gamma1=np.zeros((0, 1), dtype=complex),
                gamma_hat=None,
                imat=np.eye(1, dtype=complex),
                i1=np.eye(1, dtype=complex),
                phi=bipoly.VectorPolynomial(0, 0, "lex", grid[None, :, :]),
                lead=grid.copy(),
            )

    # -- axis levels -------------------------------------------------

    def _axis_level(self, side: str, i: int) -> None:
        own = self.primary if side == "primary" else self.mirror
        other = self.mirror if side == "primary" else self.primary
        params = self.params if side == "primary" else self.params.swapped()
        view = (
            self.table if side == "primary" else _SwappedTable(self.table)
        )
        level = (i, 0) if side == "primary" else (0, i)
        condition = (
            "axis_z_contraction" if side == "primary" else "axis_w_contraction"
        )
        u = params.get(i, 0)
        self._gate(level, condition, abs(u))
        a = float(np.sqrt(1.0 - abs(u) ** 2))
        prev = own[(i - 1, 0)]
        prev_grid = prev.phi.rows[0]
        # step recurrence: a * phi_i = z phi_{i-1} - u * rev(phi_{i-1})
        stepped = np.zeros((i + 1, 1), dtype=complex)
        stepped[1:, :] = prev_grid
        stepped -= u * _pad(bipoly.reverse_grid(prev_grid), (i + 1, 1))
        grid = stepped / a
        phi = bipoly.VectorPolynomial(i, 0, "lex", grid[None, :, :])
        # the new moment makes the step inner product come out to u
        def bracket():
            return np.array(
                [[
                    mo.grid_inner_product(
                        view, prev_grid, bipoly.reverse_grid(prev_grid),
                        p_shift=(1, 0),
                    )
                ]]
            )

        idx = (-i, 0) if side == "primary" else (0, -i)
        self._solve_moment(idx, bracket, np.array([[u]]), f"axis{level}")
        # reflection history for the reversed-orthogonality row
        es = [None] + [
            complex(own[(t, 0)].ehat[0, 0]) for t in range(1, i)
        ] + [u]
        avals = [None] + [
            float(own[(t, 0)].a[0, 0].real) for t in range(1, i)
        ] + [a]
        i1 = np.zeros((1, i + 1), dtype=complex)
        for s in range(i):
            coeff = 1.0
            for t in range(i - s + 1, i + 1):
                coeff *= avals[t]
            i1[0, s] = -coeff * np.conj(es[i - s])
        prod = 1.0
        for t in range(1, i + 1):
            prod *= avals[t]
        i1[0, i] = prod
        own[level if side == "primary" else (i, 0)] = LevelHalf(
            ehat=np.array([[u]], dtype=complex),
            a=np.array([[a]], dtype=complex),
            k=np.zeros((0, i), dtype=complex),
            gamma=np.zeros((0, 1), dtype=complex),
            k1=np.zeros((0, i), dtype=complex),
            gamma1=np.zeros((0, 1), dtype=complex),
            gamma_hat=None,
            imat=linalg.e1(i + 1).T.astype(complex),
            i1=i1,
            phi=phi,
            lead=np.array([[grid[i, 0]]], dtype=complex),
        )
        self._fill_derived(other, own, i)

    def _fill_derived(self, other, own, i: int) -> None:
        """The other orientation's view of an axis level: its (0, i)."""
        # stacked family: top row is the new degree-i polynomial
        rows = np.zeros((i + 1, 1, i + 1), dtype=complex)
        for r in range(i + 1):
            g = own[(i - r, 0)].phi.rows[0]  # shape (i-r+1, 1)
            rows[r, 0, : i - r + 1] = g[:, 0]
        phi = bipoly.VectorPolynomial(0, i, "lex", rows)
        lead = phi.leading_matrix()
        if i >= 1:
            lead_prev = other[(0, i - 1)].lead
            gamma1 = lead_prev @ linalg.selector_u1(i) @ np.linalg.inv(lead)
        else:
            gamma1 = np.zeros((0, 1), dtype=complex)
        gamma = linalg.selector_u(i)
        other[(0, i)] = LevelHalf(
            ehat=None, a=None,
            k=np.zeros((i, 0), dtype=complex),
            gamma=gamma,
            k1=np.zeros((i, 0), dtype=complex),
            gamma1=gamma1,
            gamma_hat=np.vstack([gamma1[0:1, :], gamma]),
            imat=linalg.e1(i + 1).astype(complex),
            i1=own[(i, 0)].i1.T.copy(),
            phi=phi,
            lead=lead,
        )

    # -- moment extension --------------------------------------------

    def _solve_moment(self, idx, bracket, target, label: str) -> None:
        i, j = idx
        _force_moment(self.table, i, j, 0.0)
        base = bracket()
        _force_moment(self.table, i, j, 1.0)
        delta = bracket() - base
        flat = int(np.argmax(np.abs(delta)))
        dval = delta.flat[flat]
        if abs(dval) <= SOLVE_GUARD:
            raise RuntimeError(f"degenerate moment solve at {label}")
        x = (target - base).flat[flat] / dval
        _force_moment(self.table, i, j, x)
        resid = float(np.max(np.abs(base + x * delta - target)))
        scale = max(1.0, float(np.max(np.abs(target))))
        self._note("moment_solve_consistency", resid / scale)
        if resid > CONSISTENCY_TOL * scale:
            raise RuntimeError(
                f"inconsistent moment extension at {label} ({resid:.3e})"
            )

    # -- interior levels ---------------------------------------------

    def _interior_level(self, n: int, m: int) -> None:
        P, Q = self.primary, self.mirror
        below = P[(n, m - 1)]
        left = P[(n - 1, m)]
        qbelow = Q[(m - 1, n)]
        qleft = Q[(m, n - 1)]
        u_nm = self.params.get(n, m)
        u_neg = self.params.get(-n, m)
        eye_m = np.eye(m, dtype=complex)
        eye_n = np.eye(n, dtype=complex)

        # K
        if n == 1 and m == 1:
            k = np.array([[u_neg]], dtype=complex)
        else:
            core = np.zeros((m, n), dtype=complex)
            core[m - 1, n - 1] = u_neg
            if m >= 2:
                h = np.linalg.solve(
                    P[(n, m - 2)].lead,
                    below.k - below.k1 @ qleft.ehat.conj().T,
                ) @ np.linalg.inv(Q[(m - 1, n - 1)].lead.conj().T)
                core[: m - 1, :] += h
            if n >= 2:
                ht = np.linalg.solve(
                    P[(n - 1, m - 1)].lead,
                    left.k - below.ehat @ np.conj(left.k1),
                ) @ np.linalg.inv(Q[(m, n - 2)].lead.conj().T)
                core[m - 1, : n - 1] += ht[m - 1, :]
            k = below.lead @ core @ qleft.lead.conj().T
        self._gate((n, m), "k_contraction", linalg.spectral_norm(k))

        gamma = np.hstack(
            [np.zeros((m, 1)), linalg.upper_cholesky(eye_m - k @ k.conj().T)]
        )
        gamma_t = np.hstack(
            [np.zeros((n, 1)), linalg.upper_cholesky(eye_n - k.conj().T @ k)]
        )

        # K1
        k1 = np.zeros((m, n), dtype=complex)
        ta_inv = None
        if not (n == 1 and m == 1):
            if m >= 2:
                ta_inv = np.linalg.inv(qleft.a)
                rows = np.linalg.solve(
                    below.gamma @ linalg.selector_u(m - 1).conj().T,
                    below.k1 @ ta_inv.T
                    - below.k @ qleft.ehat @ ta_inv.T,
                )
                k1[1:, :] = rows
            if n >= 2:
                cols = _solve_tri_right(
                    np.linalg.solve(
                        below.a, left.k1 - below.ehat @ np.conj(left.k)
                    ),
                    linalg.selector_u(n - 1) @ qleft.gamma.T,
                    lower=True,
                )
                if m >= 2:
                    self._note(
                        "k1_overlap", np.max(np.abs(k1[1:, 1:] - cols[1:, :]))
                        if cols[1:, :].size else 0.0,
                    )
                k1[:, 1:] = cols
        k1[0, 0] = np.conj(u_nm)
        norm_k1 = linalg.spectral_norm(k1)
        if norm_k1 >= 1.0 - self.margin:
            raise Inadmissible((n, m), "k1_contraction", norm_k1)

        # extend the functional: two new moments at this level
        tilde = _transpose_vp(qleft.phi)  # level (n-1, m) in primary coords
        t_grids = [
            _pad(g, (n + 1, m + 1)) for g in tilde.rows
        ]
        t_rev = [
            _pad(bipoly.reverse_grid(g), (n + 1, m + 1)) for g in tilde.rows
        ]
        b_grids = [_pad(g, (n + 1, m + 1)) for g in below.phi.rows]

        def k_bracket():
            out = np.zeros((m, n), dtype=complex)
            for r in range(m):
                for s in range(n):
                    out[r, s] = mo.grid_inner_product(
                        self.table, b_grids[r], t_grids[s]
                    )
            return out

        self._solve_moment((-n, m), k_bracket, k, f"K({n},{m})")

        def k1_bracket():
            out = np.zeros((m, n), dtype=complex)
            for r in range(m):
                for s in range(n):
                    out[r, s] = mo.grid_inner_product(
                        self.table, b_grids[r], t_rev[s], p_shift=(0, 1)
                    )
            return out

        self._solve_moment((-n, -m), k1_bracket, k1, f"K1({n},{m})")

        # reflection coefficients, both orientations
        ehat = linalg.solve_upper(
            left.gamma_hat,
            linalg.selector_u(m).T
            @ (
                below.a @ k @ left.i1.conj().T
                + below.ehat @ np.conj(left.gamma1)
            )
            + linalg.e1(m + 1)
            @ linalg.e1(m).T
            @ (
                below.a @ k1 @ left.imat.T
                + below.ehat @ np.conj(left.gamma)
            ),
        )
        self._note("ehat_symmetry", np.max(np.abs(ehat - ehat.T)))
        t_ehat = linalg.solve_upper(
            qbelow.gamma_hat,
            linalg.selector_u(n).T
            @ (
                qleft.a @ k.conj().T @ qbelow.i1.conj().T
                + qleft.ehat @ np.conj(qbelow.gamma1)
            )
            + linalg.e1(n + 1)
            @ linalg.e1(n).T
            @ (
                qleft.a @ k1.T @ qbelow.imat.T
                + qleft.ehat @ np.conj(qbelow.gamma)
            ),
        )
        try:
            a = linalg.upper_cholesky(
                np.eye(m + 1, dtype=complex) - ehat @ ehat.conj().T
            )
            t_a = linalg.upper_cholesky(
                np.eye(n + 1, dtype=complex) - t_ehat @ t_ehat.conj().T
            )
        except linalg.NotPositiveDefinite:
            raise Inadmissible(
                (n, m), "ehat_contraction", linalg.spectral_norm(ehat)
            ) from None

        # upper-step coefficient matrices
        ug = linalg.selector_u(m) @ gamma.conj().T
        t_ug = linalg.selector_u(n) @ gamma_t.conj().T
        mix = np.linalg.solve(
            np.conj(qleft.a),
            qleft.ehat.conj().T @ qleft.a @ k.conj().T,
        )
        mid = (
            below.imat @ t_ehat @ below.i1.T
            + below.gamma.conj().T @ below.gamma1
            + k1 @ mix
        )
        g1_right = _solve_tri_right(mid, ug, lower=True)
        common = linalg.solve_lower(qbelow.gamma_hat.T, below.i1.T)
        common = _solve_tri_right(common, ug, lower=True)
        inner = (
            below.i1.conj().T @ np.conj(k) @ qleft.a.T
            + qbelow.gamma1.conj().T @ qleft.ehat
        )
        h2 = below.imat @ inner @ linalg.selector_u(n) @ common
        h1 = (
            qleft.a.T @ linalg.e1(n) @ linalg.e1(n + 1).T @ common
            + _solve_tri_right(mix, ug, lower=True)
        )
        hh = h2 + k1 @ h1
        h3 = hh @ hh.conj().T + k1 @ k1.conj().T
        h3_scalar = float(h3[0, 0].real)
        self._gate((n, m), "h3_bound", h3_scalar)
        self._note("g1_first_row_consistency",
                   np.max(np.abs(g1_right[0, :] - hh[0, :])))
        gamma1 = np.zeros((m, m + 1), dtype=complex)
        gamma1[:, 1:] = g1_right
        gamma1[0, 0] = np.sqrt(1.0 - h3_scalar)

        t_mix = np.linalg.solve(
            np.conj(below.a), below.ehat.conj().T @ below.a @ k
        )
        t_mid = (
            qleft.imat @ ehat @ qleft.i1.T
            + qleft.gamma.conj().T @ qleft.gamma1
            + k1.T @ t_mix
        )
        t_g1_right = _solve_tri_right(t_mid, t_ug, lower=True)
        t_common = linalg.solve_lower(left.gamma_hat.T, qleft.i1.T)
        t_common = _solve_tri_right(t_common, t_ug, lower=True)
        t_inner = (
            qleft.i1.conj().T @ k.T @ below.a.T
            + left.gamma1.conj().T @ below.ehat
        )
        t_h2 = qleft.imat @ t_inner @ linalg.selector_u(m) @ t_common
        t_h1 = (
            below.a.T @ linalg.e1(m) @ linalg.e1(m + 1).T @ t_common
            + _solve_tri_right(t_mix, t_ug, lower=True)
        )
        t_hh = t_h2 + k1.T @ t_h1
        t_h3 = t_hh @ t_hh.conj().T + k1.T @ (k1.T).conj().T
        t_h3_scalar = float(t_h3[0, 0].real)
        if t_h3_scalar >= 1.0 - self.margin:
            raise Inadmissible((n, m), "h3_bound_mirror", t_h3_scalar)
        t_gamma1 = np.zeros((n, n + 1), dtype=complex)
        t_gamma1[:, 1:] = t_g1_right
        t_gamma1[0, 0] = np.sqrt(1.0 - t_h3_scalar)

        # interchange coefficients
        gu_t = gamma_t @ linalg.selector_u(n).conj().T  # upper n x n
        imat = np.zeros((m + 1, n + 1), dtype=complex)
        imat[0, 0] = 1.0
        imat[:, 1:] = _solve_tri_right(
            -gamma.conj().T @ k, gu_t.conj().T, lower=True
        )
        i1 = (
            -np.linalg.solve(np.conj(a), ehat.conj().T @ a @ imat)
            + a.T @ left.i1 @ gamma_t
        )

        # polynomials from the stacked step system
        ghat = np.vstack([gamma1[0:1, :], gamma])
        rhs = np.zeros((m + 1, n + 1, m + 1), dtype=complex)
        w_below = [np.zeros((n + 1, m + 1), dtype=complex) for _ in range(m)]
        for r in range(m):
            w_below[r][:, 1:] = below.phi.rows[r][:, :]
        rhs[0] = w_below[0] - sum(
            k1[0, s] * t_rev[s] for s in range(n)
        )
        for r in range(m):
            rhs[r + 1] = b_grids[r] - sum(
                k[r, s] * t_grids[s] for s in range(n)
            )
        flat = rhs.reshape(m + 1, -1)
        grids = linalg.solve_upper(ghat, flat).reshape(m + 1, n + 1, m + 1)
        phi = bipoly.VectorPolynomial(n, m, "lex", grids)
        lead = phi.leading_matrix()

        t_ghat = np.vstack([t_gamma1[0:1, :], gamma_t])
        t_rhs = np.zeros((n + 1, m + 1, n + 1), dtype=complex)
        p_tilde = [
            _pad(np.transpose(g), (m + 1, n + 1)) for g in below.phi.rows
        ]
        p_tilde_rev = [
            _pad(np.transpose(bipoly.reverse_grid(g)), (m + 1, n + 1))
            for g in below.phi.rows
        ]
        q_grids = [_pad(g, (m + 1, n + 1)) for g in qleft.phi.rows]
        w_qleft = [np.zeros((m + 1, n + 1), dtype=complex) for _ in range(n)]
        for r in range(n):
            w_qleft[r][:, 1:] = qleft.phi.rows[r][:, :]
        kq = k.conj().T
        k1q = k1.T
        t_rhs[0] = w_qleft[0] - sum(
            k1q[0, s] * p_tilde_rev[s] for s in range(m)
        )
        for r in range(n):
            t_rhs[r + 1] = q_grids[r] - sum(
                kq[r, s] * p_tilde[s] for s in range(m)
            )
        t_flat = t_rhs.reshape(n + 1, -1)
        t_grids_new = linalg.solve_upper(t_ghat, t_flat).reshape(
            n + 1, m + 1, n + 1
        )
        t_phi = bipoly.VectorPolynomial(m, n, "lex", t_grids_new)
        t_lead = t_phi.leading_matrix()

        P[(n, m)] = LevelHalf(
            ehat=ehat, a=a, k=k, gamma=gamma, k1=k1, gamma1=gamma1,
            gamma_hat=ghat, imat=imat, i1=i1, phi=phi, lead=lead,
        )
        Q[(m, n)] = LevelHalf(
            ehat=t_ehat, a=t_a, k=k.conj().T, gamma=gamma_t, k1=k1.T,
            gamma1=t_gamma1, gamma_hat=t_ghat, imat=imat.conj().T,
            i1=i1.T, phi=t_phi, lead=t_lead,
        )


def synthesize(params: ParameterGrid, margin: float = MARGIN) -> SynthesisState:
    """Run the full level schedule; raises Inadmissible on gate failure."""
    return _Synthesizer(params, margin).run()


def admissibility(params: ParameterGrid, margin: float = MARGIN) -> AdmissibilityReport:
    """Certification wrapper: the report instead of an exception."""
    s = _Synthesizer(params, margin)
    try:
        s.run()
    except Inadmissible:
        pass
    return s.report


def extract_parameters(
    moments: mo.MomentTable, n_top: int, m_top: int
) -> ParameterGrid:
    """Inverse of synthesize on its image.

    Axis parameters are the one-variable reflection coefficients;
    interior parameters come from the normalized corner of K and the
    corner of K1.  Requires the top-level moment matrix to be positive
    definite.
    """
    c = mo.assemble(moments, n_top, m_top)
    linalg.lower_cholesky(c)  # raises NotPositiveDefinite otherwise
    grid = ParameterGrid(n_top, m_top)
    grid.set(0, 0, moments.get(0, 0).real)
    swapped = moments.swapped()
    for i in range(1, n_top + 1):
        cf = bipoly._lex_coefficients(
            moments.copy(m_max=0), i, 0
        )
        grid.set(i, 0, complex(cf.ehat[0, 0]))
    for j in range(1, m_top + 1):
        cf = bipoly._lex_coefficients(swapped.copy(m_max=0), j, 0)
        grid.set(0, j, complex(cf.ehat[0, 0]))
    for n in range(1, n_top + 1):
        for m in range(1, m_top + 1):
            cf = bipoly._lex_coefficients(moments, n, m)
            grid.set(n, m, np.conj(cf.k1[0, 0]))
            if n == 1 and m == 1:
                grid.set(-1, 1, complex(cf.k[0, 0]))
            else:
                lead_b = bipoly.phi_level(moments, n, m - 1).leading_matrix()
                lead_t = bipoly.phi_tilde_level(
                    moments, n - 1, m
                ).leading_matrix()
                core = np.linalg.solve(lead_b, cf.k) @ np.linalg.inv(
                    lead_t.conj().T
                )
                grid.set(-n, m, complex(core[m - 1, n - 1]))
    return grid


def one_step_extension(
    moments: mo.MomentTable,
    n: int,
    m: int,
    u_nm: complex,
    u_neg_nm: complex,
    margin: float = MARGIN,
) -> SynthesisState:
    """Extend a functional known below level (n, m) by one level.

    The input table must cover the union of the (n-1, m) and (n, m-1)
    windows with positive definite moment matrices there.  The two new
    parameters drive the extension; Inadmissible is raised when no
    positive extension with these parameters exists.
    """
    partial = ParameterGrid(n, m)
    partial.set(0, 0, moments.get(0, 0).real)
    swapped = moments.swapped()
    for i in range(1, n + 1):
        cf = bipoly._lex_coefficients(moments.copy(m_max=0), i, 0)
        partial.set(i, 0, complex(cf.ehat[0, 0]))
    for j in range(1, m + 1):
        cf = bipoly._lex_coefficients(swapped.copy(m_max=0), j, 0)
        partial.set(0, j, complex(cf.ehat[0, 0]))
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            if (i, j) == (n, m):
                continue
            cf = bipoly._lex_coefficients(moments, i, j)
            partial.set(i, j, np.conj(cf.k1[0, 0]))
            if i == 1 and j == 1:
                partial.set(-1, 1, complex(cf.k[0, 0]))
            else:
                lead_b = bipoly.phi_level(moments, i, j - 1).leading_matrix()
                lead_t = bipoly.phi_tilde_level(
                    moments, i - 1, j
                ).leading_matrix()
                core = np.linalg.solve(lead_b, cf.k) @ np.linalg.inv(
                    lead_t.conj().T
                )
                partial.set(-i, j, complex(core[j - 1, i - 1]))
    partial.set(n, m, u_nm)
    partial.set(-n, m, u_neg_nm)
    return synthesize(partial, margin)
