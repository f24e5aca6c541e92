"""Linearisation of ``F_{b,a}`` at the origin: spectrum, low-order resonances and
the first Birkhoff twist coefficient."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .dynamics import MapSpec
from .errors import DomainError
from .rotation import jacobian_fd

RESONANCE_TOL = 1e-12


def char_poly(a, b):
    """Coefficients ``(1, 2 - ab, 1)`` of the characteristic polynomial of ``DF_{b,a}(0)``."""
    return (1.0, 2.0 - a * b, 1.0)


def jacobian_origin_F(a, b):
    """``DF_{b,a}(0) = [[-1, a], [-b, ab - 1]]``."""
    return np.array([[-1.0, a], [-b, a * b - 1.0]])


def eigen_origin_F(a, b):
    """Eigenvalues ``(lambda+, lambda-)`` of ``DF_{b,a}(0)``; a unit-modulus pair when ``ab < 4``."""
    if not (a > 0 and b > 0):
        raise DomainError("parameters must be positive")
    ab = a * b
    if ab < 4:
        im = 0.5 * math.sqrt(ab * (4 - ab))
        return complex(-1 + ab / 2, im), complex(-1 + ab / 2, -im)
    root = math.sqrt(ab * (ab - 4))
    return complex(-1 + ab / 2 + root / 2, 0.0), complex(-1 + ab / 2 - root / 2, 0.0)


def fd_eigenvalues(a, b, eps=1e-6):
    """Eigenvalues of a central-difference Jacobian of ``F_{b,a}`` at the origin, sorted like :func:`eigen_origin_F`."""
    J = jacobian_fd(MapSpec.composed_f(a, b), (0.0, 0.0), eps)
    lam = np.linalg.eigvals(J).astype(complex)
    return tuple(sorted(lam, key=lambda z: (-z.imag, -z.real)))


def resultant_closed_form(a, b, k):
    """``Res(lambda^2 + (2 - ab) lambda + 1, lambda^k - 1)`` for ``k = 1, 2, 3``."""
    ab = a * b
    if k == 1:
        return 4 - ab
    if k == 2:
        return (4 - ab) * ab
    if k == 3:
        return (4 - ab) * (1 - ab) ** 2
    raise DomainError("closed forms exist for k = 1, 2, 3")


def sylvester_matrix(p, q):
    """Sylvester matrix of two coefficient lists (highest degree first)."""
    m, n = len(p) - 1, len(q) - 1
    S = [[0] * (m + n) for _ in range(m + n)]
    for i in range(n):
        for j, c in enumerate(p):
            S[i][i + j] = c
    for i in range(m):
        for j, c in enumerate(q):
            S[n + i][i + j] = c
    return S


def exact_det(M):
    """Determinant over the rationals by fraction-free elimination."""
    A = [[Fraction(v) for v in row] for row in M]
    n = len(A)
    sign, prev = 1, Fraction(1)
    for c in range(n - 1):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            sign = -sign
        for r in range(c + 1, n):
            for j in range(c + 1, n):
                A[r][j] = (A[c][c] * A[r][j] - A[r][c] * A[c][j]) / prev
            A[r][c] = Fraction(0)
        prev = A[c][c]
    return sign * A[n - 1][n - 1] if n else Fraction(1)


def resultant_sylvester(a, b, k):
    """``Res(P_{a,b}, lambda^k - 1)`` as an exact Sylvester determinant (``a, b`` read as exact rationals)."""
    ab = Fraction(a) * Fraction(b)
    p = [Fraction(1), 2 - ab, Fraction(1)]
    q = [Fraction(1)] + [Fraction(0)] * (k - 1) + [Fraction(-1)]
    return exact_det(sylvester_matrix(p, q))


def resonance_check(a, b, tol=RESONANCE_TOL, exact=False):
    """Orders ``k`` in ``{1, 2, 3}`` whose resultant vanishes.

    With ``exact=True`` the Sylvester determinant decides; otherwise the closed
    form is compared with zero to ``tol`` relative to its scale.
    """
    out = set()
    for k in (1, 2, 3):
        if exact:
            if resultant_sylvester(a, b, k) == 0:
                out.add(k)
        else:
            ab = a * b
            scale = max(1.0, ab) ** (k if k > 1 else 1)
            if abs(resultant_closed_form(a, b, k)) <= tol * scale:
                out.add(k)
    return frozenset(out)


def birkhoff_sigma(a, b):
    """First Birkhoff coefficient of ``F_{b,a}`` at the origin, defined for ``0 < ab < 4``."""
    ab = a * b
    if not (a > 0 and b > 0) or ab >= 4:
        raise DomainError(f"sigma needs 0 < ab < 4, got ab={ab}")
    return 3 * (a + b) * math.sqrt(ab * (4 - ab)) / (4 * b * (4 - ab))


@dataclass(frozen=True)
class LocalReport:
    a: float
    b: float
    char_poly: tuple
    eigenvalues: tuple
    resonant_orders: frozenset
    sigma: float
    sigma_swapped: float

    @property
    def rotation_fraction(self) -> float:
        """``arg(lambda+) / 2pi``."""
        return cmath.phase(self.eigenvalues[0]) / (2 * math.pi)

    def to_dict(self):
        return {
            "a": self.a,
            "b": self.b,
            "char_poly": list(self.char_poly),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "resonant_orders": sorted(self.resonant_orders),
            "sigma": self.sigma,
            "sigma_swapped": self.sigma_swapped,
        }


def local_report(a, b) -> LocalReport:
    ab = a * b
    nan = float("nan")
    sigma = birkhoff_sigma(a, b) if ab < 4 else nan
    swapped = birkhoff_sigma(b, a) if ab < 4 else nan
    return LocalReport(a, b, char_poly(a, b), eigen_origin_F(a, b), resonance_check(a, b), sigma, swapped)
