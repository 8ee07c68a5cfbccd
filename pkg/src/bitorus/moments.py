"""Moment functionals on the bicircle.

A MomentTable holds the moments c_{i,j} of a linear functional on the
Laurent span of z^i w^j, |i| <= n_max, |j| <= m_max, with the conjugate
symmetry c_{-i,-j} = conj(c_{i,j}) enforced on insertion.  The table can
be assembled into the doubly Toeplitz moment matrix in either monomial
ordering, evaluated on Laurent polynomials, tested for positive
definiteness, and produced from a positive density on the torus by
tensor trapezoid quadrature (equivalently, a 2-D FFT of samples).

Monomial stacking convention (used consistently across the package):
the lex coefficient vector of the level-(n, m) space is ordered
(z^n w^m, z^n w^{m-1}, ..., z^n, z^{n-1} w^m, ..., 1), descending in
both exponents.
"""

from __future__ import annotations

from typing import Callable, Dict, Iterable, Tuple

import numpy as np

from . import linalg

Index = Tuple[int, int]

FLOAT_FMT = "%.17g"


class MissingMoment(KeyError):
    """A requested moment index is outside the stored window."""


class NonPositiveDensitySample(ValueError):
    """A density sample on the quadrature grid was not strictly positive."""


class MomentTable:
    """The doubly indexed moments c_{i,j}; immutable once populated."""

    def __init__(self, n_max: int, m_max: int):
        if n_max < 0 or m_max < 0:
            raise ValueError("window bounds must be nonnegative")
        self.n_max = n_max
        self.m_max = m_max
        self._values: Dict[Index, complex] = {}

    def set(self, i: int, j: int, value: complex) -> None:
        if abs(i) > self.n_max or abs(j) > self.m_max:
            raise ValueError(f"moment index ({i},{j}) outside window")
        value = complex(value)
        if (i, j) == (0, 0):
            value = complex(value.real, 0.0)
        old = self._values.get((-i, -j))
        if old is not None and abs(old - value.conjugate()) > 1e-12 * max(
            1.0, abs(old)
        ):
            raise ValueError(
                f"conjugate symmetry violated at ({i},{j})"
            )
        self._values[(i, j)] = value
        self._values[(-i, -j)] = value.conjugate()

    def get(self, i: int, j: int) -> complex:
        try:
            return self._values[(i, j)]
        except KeyError:
            raise MissingMoment((i, j)) from None

    def has(self, i: int, j: int) -> bool:
        return (i, j) in self._values

    def items(self) -> Iterable[Tuple[Index, complex]]:
        return self._values.items()

    def copy(self, n_max: int | None = None, m_max: int | None = None) -> "MomentTable":
        out = MomentTable(
            self.n_max if n_max is None else n_max,
            self.m_max if m_max is None else m_max,
        )
        for (i, j), v in self._values.items():
            if abs(i) <= out.n_max and abs(j) <= out.m_max:
                out._values[(i, j)] = v
        return out

    def swapped(self) -> "MomentTable":
        """Table of the functional with the roles of z and w interchanged."""
        out = MomentTable(self.m_max, self.n_max)
        for (i, j), v in self._values.items():
            out._values[(j, i)] = v
        return out

    # -- constructors ------------------------------------------------

    @classmethod
    def delta(cls, n_max: int, m_max: int) -> "MomentTable":
        """Normalized Lebesgue measure: c_{0,0} = 1, all other moments 0."""
        t = cls(n_max, m_max)
        for i in range(-n_max, n_max + 1):
            for j in range(-m_max, m_max + 1):
                t._values[(i, j)] = 1.0 + 0j if (i, j) == (0, 0) else 0.0 + 0j
        return t

    @classmethod
    def from_density(
        cls,
        density: Callable[[np.ndarray, np.ndarray], np.ndarray],
        n_max: int,
        m_max: int,
        grid: Tuple[int, int] = (256, 256),
    ) -> "MomentTable":
        """Quadrature moments of a strictly positive torus density.

        density(theta, phi) must accept broadcasting meshgrid arrays and
        return real positive values.  The tensor trapezoid rule on the
        periodic grid is exact for trigonometric polynomials whose
        bidegree stays below (grid/2 - n_max, grid/2 - m_max).
        """
        p, q = grid
        if p < 2 * n_max + 2 or q < 2 * m_max + 2:
            raise ValueError("quadrature grid too coarse for the window")
        theta = 2 * np.pi * np.arange(p) / p
        phi = 2 * np.pi * np.arange(q) / q
        th, ph = np.meshgrid(theta, phi, indexing="ij")
        samples = np.asarray(density(th, ph))
        if np.any(samples.real <= 0.0) or np.any(np.abs(samples.imag) > 1e-12):
            raise NonPositiveDensitySample(
                "density must be strictly positive on the quadrature grid"
            )
        coeffs = np.fft.fft2(samples.real) / (p * q)
        t = cls(n_max, m_max)
        for i in range(0, n_max + 1):
            jlo = 0 if i == 0 else -m_max
            for j in range(jlo, m_max + 1):
                t.set(i, j, complex(coeffs[i % p, j % q]))
        return t

    # -- file format -------------------------------------------------

    def save(self, path) -> None:
        """Text format: header `moments n_max m_max`, lines `i j re im`.

        Only the half-plane i > 0 or (i = 0, j >= 0) is stored; conjugate
        symmetry reconstructs the rest.  17 significant digits give a
        bit-exact decimal round trip.
        """
        lines = [f"moments {self.n_max} {self.m_max}"]
        for i in range(0, self.n_max + 1):
            jlo = 0 if i == 0 else -self.m_max
            for j in range(jlo, self.m_max + 1):
                if self.has(i, j):
                    v = self.get(i, j)
                    lines.append(
                        f"{i} {j} {FLOAT_FMT % v.real} {FLOAT_FMT % v.imag}"
                    )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "MomentTable":
        with open(path) as fh:
            raw = [ln.strip() for ln in fh if ln.strip()]
        if not raw or not raw[0].startswith("moments"):
            raise ValueError("missing `moments n_max m_max` header")
        try:
            _, n_s, m_s = raw[0].split()
            t = cls(int(n_s), int(m_s))
        except ValueError as exc:
            raise ValueError(f"bad header line: {raw[0]!r}") from exc
        for lineno, ln in enumerate(raw[1:], start=2):
            parts = ln.split()
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected `i j re im`")
            i, j = int(parts[0]), int(parts[1])
            t.set(i, j, complex(float(parts[2]), float(parts[3])))
        return t


# -- Laurent polynomials and the functional --------------------------


def evaluate(moments: MomentTable, poly: Dict[Index, complex]) -> complex:
    """Apply the functional: L(z^i w^j) = conj(c_{i,j}) = c_{-i,-j}."""
    acc = 0.0 + 0j
    for (i, j), coeff in poly.items():
        acc += coeff * moments.get(-i, -j)
    return acc


def inner_product(
    moments: MomentTable, p: Dict[Index, complex], q: Dict[Index, complex]
) -> complex:
    """<p, q> = L(p conj(q)); linear in p, conjugate linear in q."""
    acc = 0.0 + 0j
    for (a, b), pa in p.items():
        for (c, d), qc in q.items():
            acc += pa * np.conj(qc) * moments.get(c - a, d - b)
    return acc


def grid_inner_product(
    moments: MomentTable, p: np.ndarray, q: np.ndarray,
    p_shift: Index = (0, 0), q_shift: Index = (0, 0),
) -> complex:
    """Inner product of coefficient-grid polynomials p[i, j] z^i w^j.

    Optional exponent shifts multiply p or q by z^a w^b without copying.
    """
    acc = 0.0 + 0j
    ps, qs = p_shift, q_shift
    for a in range(p.shape[0]):
        for b in range(p.shape[1]):
            pa = p[a, b]
            if pa == 0:
                continue
            for c in range(q.shape[0]):
                for d in range(q.shape[1]):
                    qc = q[c, d]
                    if qc == 0:
                        continue
                    acc += pa * np.conj(qc) * moments.get(
                        (c + qs[0]) - (a + ps[0]), (d + qs[1]) - (b + ps[1])
                    )
    return acc


def lex_monomials(n: int, m: int) -> list[Index]:
    """Exponent pairs in the descending stacking order (z^n w^m, ..., 1)."""
    return [(n - a, m - b) for a in range(n + 1) for b in range(m + 1)]


def assemble(
    moments: MomentTable, n: int, m: int, ordering: str = "lex"
) -> np.ndarray:
    """The (n+1)(m+1) doubly Toeplitz moment matrix C_{n,m}.

    Lex ordering gives the block Toeplitz matrix of Toeplitz blocks C_i
    with (C_i)[r, s] = c_{i, r-s}; revlex interchanges the roles of the
    two variables.
    """
    if ordering == "revlex":
        return assemble(moments.swapped(), m, n, "lex")
    if ordering != "lex":
        raise ValueError("ordering must be 'lex' or 'revlex'")
    size = (n + 1) * (m + 1)
    c = np.zeros((size, size), dtype=complex)
    for i in range(-n, n + 1):
        block = np.zeros((m + 1, m + 1), dtype=complex)
        for r in range(m + 1):
            for s in range(m + 1):
                block[r, s] = moments.get(i, r - s)
        for br in range(n + 1):
            bc = br - i
            if 0 <= bc <= n:
                c[
                    br * (m + 1): (br + 1) * (m + 1),
                    bc * (m + 1): (bc + 1) * (m + 1),
                ] = block
    return c


def is_positive_definite(
    moments: MomentTable, n: int, m: int
) -> tuple[bool, float]:
    """PD verdict for C_{n,m} plus the smallest elimination pivot."""
    c = assemble(moments, n, m)
    pivot = linalg.min_cholesky_pivot(c)
    try:
        linalg.lower_cholesky(c)
        return True, pivot
    except (linalg.NotPositiveDefinite, ValueError):
        return False, pivot


def moments_from_density(
    density: Callable[[np.ndarray, np.ndarray], np.ndarray],
    n_max: int,
    m_max: int,
    grid: Tuple[int, int] = (256, 256),
) -> MomentTable:
    return MomentTable.from_density(density, n_max, m_max, grid)
