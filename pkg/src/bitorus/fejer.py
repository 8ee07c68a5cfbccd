"""Stable bivariate factors and two-variable Fejer-Riesz factorization.

A positive functional whose coupling matrix K_{n,m} vanishes is the
reciprocal-square measure of a single polynomial: the top row of the
level-(n, m) family has a stable reverse and reproduces every moment
in the (n, m) window by quadrature against 1/|phi|^2.  Conversely a
strictly positive trigonometric polynomial factors as |p|^2 with p of
matching bidegree exactly when the K of its reciprocal measure is
zero, which makes the factorization test a one-matrix criterion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from . import bipoly, linalg, moments as mo

ZERO_TOL = 1e-8
MATCH_TOL = 1e-7
STABILITY_FLOOR = 1e-12


class NotApplicable(ValueError):
    """The coupling matrix is not (numerically) zero."""

    def __init__(self, k_norm: float):
        self.k_norm = k_norm
        super().__init__(f"coupling matrix norm {k_norm:.6g} is not zero")


class NotPositive(ValueError):
    """The sampled trigonometric polynomial is not strictly positive."""


@dataclass(frozen=True)
class StabilityCertificate:
    radial: int
    angular: int
    min_modulus: float
    winding_defect: int
    stable: bool


@dataclass(frozen=True)
class StablePolynomial:
    """Bivariate polynomial whose reverse is certified nonvanishing
    on the closed bidisk."""

    n: int
    m: int
    grid: np.ndarray
    certificate: StabilityCertificate

    def __call__(self, z, w):
        return _eval_grid(self.grid, z, w)

    def reverse(self) -> np.ndarray:
        return bipoly.reverse_grid(self.grid)


@dataclass(frozen=True)
class FactorizationResult:
    verdict: str  # Factored | NotFactorable | NotPositive
    factor: Optional[StablePolynomial]
    k_norm: float
    reconstruction_error: float
    min_sample: float


def _eval_grid(grid: np.ndarray, z, w):
    """Vectorized evaluation; z and w broadcast like meshgrid arrays."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    acc = np.zeros(np.broadcast(z, w).shape, dtype=complex)
    for row in grid[::-1]:
        inner = np.zeros_like(acc)
        for c in row[::-1]:
            inner = inner * w + c
        acc = acc * z + inner
    return acc


def _winding(values: np.ndarray) -> int:
    phases = np.angle(values)
    steps = np.diff(np.concatenate([phases, phases[:1]]))
    steps = (steps + np.pi) % (2 * np.pi) - np.pi
    return int(round(steps.sum() / (2 * np.pi)))


def certify_stable(
    grid: np.ndarray, radial: int = 16, angular: int = 64
) -> StabilityCertificate:
    """Sampling plus winding-number certificate of bidisk nonvanishing.

    The minimum modulus is taken over a radial x angular grid in each
    variable; winding numbers of the one-variable slices through the
    sampled radii of the other variable must all vanish.
    """
    radii = np.linspace(0.0, 1.0, radial)
    angles = np.exp(2j * np.pi * np.arange(angular) / angular)
    pts = (radii[:, None] * angles[None, :]).ravel()
    vals = _eval_grid(grid, pts[:, None], pts[None, :])
    min_mod = float(np.min(np.abs(vals)))
    winding_defect = 0
    circle = np.exp(2j * np.pi * np.arange(256) / 256)
    for r in radii:
        for ang in angles[:: max(1, angular // 8)]:
            other = r * ang
            sl = _eval_grid(grid, circle, other)
            if np.min(np.abs(sl)) > STABILITY_FLOOR:
                winding_defect += abs(_winding(sl))
            sl = _eval_grid(grid, other, circle)
            if np.min(np.abs(sl)) > STABILITY_FLOOR:
                winding_defect += abs(_winding(sl))
    stable = min_mod > STABILITY_FLOOR and winding_defect == 0
    return StabilityCertificate(radial, angular, min_mod, winding_defect, stable)


def coupling_norm(moments: mo.MomentTable, n: int, m: int) -> float:
    """Spectral norm of K_{n,m} from its defining inner products."""
    below = bipoly.phi_level(moments, n, m - 1)
    left_t = bipoly.phi_tilde_level(moments, n - 1, m)
    k = bipoly.vector_inner(moments, below, left_t)
    return linalg.spectral_norm(k) if k.size else 0.0


def stable_from_functional(
    moments: mo.MomentTable, n: int, m: int, zero_tol: float = ZERO_TOL
) -> StablePolynomial:
    """The degree-(n, m) spectral factor of a coupling-free functional.

    Returns the top row of the level family; its reverse is certified
    stable.  Raises NotApplicable (with the norm) when the coupling
    matrix is not numerically zero, NotPositiveDefinite when the moment
    matrix fails.
    """
    scale = moments.get(0, 0).real
    linalg.lower_cholesky(mo.assemble(moments, n, m))
    k_norm = coupling_norm(moments, n, m)
    if k_norm > zero_tol * scale:
        raise NotApplicable(k_norm)
    top = bipoly.phi_level(moments, n, m).rows[0]
    cert = certify_stable(bipoly.reverse_grid(top))
    return StablePolynomial(n, m, top.copy(), cert)


def spectral_match_error(
    moments: mo.MomentTable,
    factor: np.ndarray,
    n: int,
    m: int,
    grid: Tuple[int, int] = (256, 256),
) -> float:
    """Worst moment discrepancy of 1/|factor|^2 over the (n, m) window."""
    quad = mo.moments_from_density(
        lambda th, ph: 1.0
        / np.abs(_eval_grid(factor, np.exp(1j * th), np.exp(1j * ph))) ** 2,
        n, m, grid=grid,
    )
    worst = 0.0
    for i in range(-n, n + 1):
        for j in range(-m, m + 1):
            worst = max(worst, abs(quad.get(i, j) - moments.get(i, j)))
    return worst


# -- trigonometric polynomials ---------------------------------------


def trig_eval(coeffs: Dict[Tuple[int, int], complex], z, w):
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    acc = np.zeros(np.broadcast(z, w).shape, dtype=complex)
    for (k, l), v in coeffs.items():
        acc = acc + v * z**k * w**l
    return acc


def trig_degree(coeffs: Dict[Tuple[int, int], complex]) -> Tuple[int, int]:
    n = max((abs(k) for (k, _) in coeffs), default=0)
    m = max((abs(l) for (_, l) in coeffs), default=0)
    return n, m


def hermitian_trig(
    coeffs: Dict[Tuple[int, int], complex], tol: float = 1e-12
) -> Dict[Tuple[int, int], complex]:
    """Symmetrize f_{-k,-l} = conj(f_{k,l}); reject if badly asymmetric."""
    out: Dict[Tuple[int, int], complex] = {}
    for (k, l), v in coeffs.items():
        mirror = coeffs.get((-k, -l))
        if mirror is not None and abs(np.conj(mirror) - v) > tol * max(
            1.0, abs(v)
        ):
            raise ValueError(f"coefficients not Hermitian at ({k},{l})")
        out[(k, l)] = complex(v)
        out[(-k, -l)] = np.conj(v)
    return out


def save_trig(coeffs: Dict[Tuple[int, int], complex], path) -> None:
    n, m = trig_degree(coeffs)
    lines = [f"trigpoly {n} {m}"]
    for (k, l) in sorted(coeffs):
        if k < 0 or (k == 0 and l < 0):
            continue
        v = coeffs[(k, l)]
        lines.append(f"{k} {l} {mo.FLOAT_FMT % v.real} {mo.FLOAT_FMT % v.imag}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_trig(path) -> Dict[Tuple[int, int], complex]:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw or not raw[0].startswith("trigpoly"):
        raise ValueError("missing `trigpoly n m` header")
    coeffs: Dict[Tuple[int, int], complex] = {}
    for ln in raw[1:]:
        k_s, l_s, re_s, im_s = ln.split()
        coeffs[(int(k_s), int(l_s))] = complex(float(re_s), float(im_s))
    return hermitian_trig(coeffs)


def product_coeffs(grid: np.ndarray) -> Dict[Tuple[int, int], complex]:
    """Trig coefficients of |p|^2 for a polynomial coefficient grid."""
    out: Dict[Tuple[int, int], complex] = {}
    rows, cols = grid.shape
    for a in range(rows):
        for b in range(cols):
            if grid[a, b] == 0:
                continue
            for c in range(rows):
                for d in range(cols):
                    if grid[c, d] == 0:
                        continue
                    key = (a - c, b - d)
                    out[key] = out.get(key, 0.0) + grid[a, b] * np.conj(
                        grid[c, d]
                    )
    return {k: complex(v) for k, v in out.items() if abs(v) > 0}


def fejer_riesz_factor(
    coeffs: Dict[Tuple[int, int], complex],
    n: Optional[int] = None,
    m: Optional[int] = None,
    zero_tol: float = ZERO_TOL,
) -> FactorizationResult:
    """Factor a strictly positive trig polynomial as |p|^2, or refuse.

    Builds the moments of 1/f by quadrature (grid 8x the bidegree, at
    least 128 per axis) and tests the coupling matrix of that measure;
    when it vanishes the top-row polynomial reproduces f exactly.
    """
    coeffs = hermitian_trig(coeffs)
    dn, dm = trig_degree(coeffs)
    n = dn if n is None else n
    m = dm if m is None else m
    if n < 1 or m < 1:
        raise ValueError("factorization level must be at least (1, 1)")
    gz = max(128, 8 * n)
    gw = max(128, 8 * m)
    theta = np.exp(2j * np.pi * np.arange(gz) / gz)
    phi = np.exp(2j * np.pi * np.arange(gw) / gw)
    samples = trig_eval(coeffs, theta[:, None], phi[None, :])
    min_sample = float(np.min(samples.real))
    if min_sample <= 0 or np.max(np.abs(samples.imag)) > 1e-9 * np.max(
        np.abs(samples.real)
    ):
        return FactorizationResult("NotPositive", None, 0.0, np.inf, min_sample)
    table = mo.moments_from_density(
        lambda th, ph: 1.0
        / trig_eval(coeffs, np.exp(1j * th), np.exp(1j * ph)).real,
        n, m, grid=(gz, gw),
    )
    try:
        factor = stable_from_functional(table, n, m, zero_tol)
    except NotApplicable as exc:
        return FactorizationResult(
            "NotFactorable", None, exc.k_norm, np.inf, min_sample
        )
    recon = np.abs(_eval_grid(factor.grid, theta[:, None], phi[None, :])) ** 2
    err = float(np.max(np.abs(recon - samples.real)))
    return FactorizationResult(
        "Factored", factor, coupling_norm(table, n, m), err, min_sample
    )


def geometric_test(
    moments: mo.MomentTable, n: int, m: int, zero_tol: float = ZERO_TOL
) -> bool:
    """Orthogonality of the level-(n, m-1) family to z^i w^m, i < n.

    Equivalent to the vanishing of the coupling matrix.
    """
    scale = moments.get(0, 0).real
    below = bipoly.phi_level(moments, n, m - 1)
    worst = 0.0
    for i in range(n):
        mono = np.zeros((i + 1, m + 1), dtype=complex)
        mono[i, m] = 1.0
        for g in below.rows:
            worst = max(
                worst, abs(mo.grid_inner_product(moments, g, mono))
            )
    return worst <= zero_tol * scale


def factor_residual(
    moments: mo.MomentTable,
    n: int,
    m: int,
    z: complex,
    w: complex,
    z1: complex,
    w1: complex,
) -> float:
    """Residual of the rank-one kernel identity that holds when K = 0.

    The difference of the squared top-row terms telescopes into the
    one-variable kernels of the two sub-level families.
    """
    top = bipoly.phi_level(moments, n, m)
    phi_top = bipoly.poly_eval(top.rows[0], z, w)
    phi_top1 = bipoly.poly_eval(top.rows[0], z1, w1)
    rev = bipoly.reverse_grid(top.rows[0])
    rev_v = bipoly.poly_eval(rev, z, w)
    rev_v1 = bipoly.poly_eval(rev, z1, w1)
    lhs = rev_v * np.conj(rev_v1) - phi_top * np.conj(phi_top1)
    below = bipoly.phi_level(moments, n, m - 1).reversed()
    b = below(z, w)
    b1 = below(z1, w1)
    left_t = bipoly.phi_tilde_level(moments, n - 1, m)
    t = left_t(z, w)
    t1 = left_t(z1, w1)
    rhs = (1.0 - w * np.conj(w1)) * np.sum(b * np.conj(b1)) + (
        1.0 - z * np.conj(z1)
    ) * np.sum(t * np.conj(t1))
    return float(abs(lhs - rhs))


# -- full-measure characterization -----------------------------------


@dataclass(frozen=True)
class CharacterizationResult:
    ok: bool
    condition: Optional[str]
    level: Optional[Tuple[int, int]]
    worst: float
    propagation_defect: float


def full_measure_characterization(
    params, n: int, m: int, window: int = 1, zero_tol: float = ZERO_TOL
) -> CharacterizationResult:
    """Test whether the functional of a parameter grid is the
    reciprocal-square measure of a single degree-(n, m) polynomial.

    The grid must cover levels up to (n + window, m + window).  Three
    vanishing conditions are checked on the synthesized coefficients:
    couplings along the row i = n, reflections along the column j = m,
    and all parameters beyond the corner.  On a pass, the zero pattern
    is propagated (vanishing reflections force column shifts of the
    secondary coupling matrix) as a consistency check.
    """
    from . import synthesis as syn

    n_top, m_top = params.n_top, params.m_top
    if n_top < n + window or m_top < m + window:
        raise ValueError("parameter grid does not cover the tested window")
    state = syn.synthesize(params)
    scale = params.get(0, 0).real

    def check(value, condition, level):
        return value > zero_tol * scale, float(value)

    worst = 0.0
    for j in range(m, m_top + 1):
        v = linalg.spectral_norm(state.primary[(n, j)].k)
        if v > zero_tol * scale:
            return CharacterizationResult(False, "row_coupling", (n, j), v, 0.0)
        worst = max(worst, v)
        if j + 1 <= m_top:
            v = linalg.spectral_norm(state.mirror[(j + 1, n - 1)].ehat)
            if v > zero_tol * scale:
                return CharacterizationResult(
                    False, "row_reflection", (n - 1, j + 1), v, 0.0
                )
            v = abs(params.get(n, j + 1))
            if v > zero_tol * scale:
                return CharacterizationResult(
                    False, "row_parameter", (n, j + 1), v, 0.0
                )
    for i in range(n + 1, n_top + 1):
        v = linalg.spectral_norm(state.primary[(i, m)].k)
        if v > zero_tol * scale:
            return CharacterizationResult(
                False, "column_coupling", (i, m), v, 0.0
            )
        v = linalg.spectral_norm(state.primary[(i, m - 1)].ehat)
        if v > zero_tol * scale:
            return CharacterizationResult(
                False, "column_reflection", (i, m - 1), v, 0.0
            )
        v = abs(params.get(i, m))
        if v > zero_tol * scale:
            return CharacterizationResult(
                False, "column_parameter", (i, m), v, 0.0
            )
    for i in range(n + 1, n_top + 1):
        for j in range(m + 1, m_top + 1):
            v = max(abs(params.get(i, j)), abs(params.get(-i, j)))
            if v > zero_tol * scale:
                return CharacterizationResult(
                    False, "corner_parameter", (i, j), v, 0.0
                )
    # zero-pattern propagation on the computed coefficients
    defect = 0.0
    for i in range(n + 1, n_top + 1):
        for j in range(m, m_top + 1):
            defect = max(
                defect, linalg.spectral_norm(state.primary[(i, j)].ehat)
            )
            k1 = state.primary[(i, j)].k1
            prev = state.primary[(i - 1, j)].k1
            shifted = np.hstack([np.zeros((j, 1)), prev])
            defect = max(defect, float(np.max(np.abs(k1 - shifted))))
    return CharacterizationResult(True, None, None, worst, defect)
