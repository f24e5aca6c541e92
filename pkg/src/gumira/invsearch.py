"""Exact search for phase-dependent polynomial invariants of the recurrence
``x_{n+2} = -x_n + x_{n+1} / (beta_n + x_{n+1}^2)`` with a ``k``-periodic cycle.

The ansatz at phase ``n`` is ``sum c^{i,j}_n x^i y^j`` over ``1 <= i + j <= 4``.
Requiring ``I(y, Y, n+1) = I(x, y, n)`` with ``Y = -x + y / D``, ``D = beta_n + y^2``,
and clearing ``D^4`` (the largest power of ``Y`` is 4) gives polynomial
identities in ``x, y`` whose coefficients are linear in the unknowns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError, NonPositiveBeta

MONOMIALS = tuple((i, s - i) for s in range(1, 5) for i in range(s, -1, -1))
N_MONO = len(MONOMIALS)  # 14

Poly = dict  # {(i, j): Fraction}, exponents of x and y


def _mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, 0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0}


def _pow(p: Poly, n: int) -> Poly:
    out: Poly = {(0, 0): Fraction(1)}
    for _ in range(n):
        out = _mul(out, p)
    return out


def _add(p: Poly, q: Poly, scale=1) -> Poly:
    out = dict(p)
    for k, c in q.items():
        out[k] = out.get(k, 0) + scale * c
    return {k: c for k, c in out.items() if c != 0}


def as_fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


@dataclass(frozen=True)
class ConstraintSystem:
    betas: tuple
    rows: tuple  # integer rows, one per (phase, monomial)
    n_unknowns: int

    @property
    def k(self) -> int:
        return len(self.betas)


@dataclass(frozen=True)
class InvariantAnsatz:
    """Coefficients ``coeffs[n][(i, j)]`` of ``x^i y^j`` at phase ``n``."""

    betas: tuple
    coeffs: tuple

    @property
    def k(self) -> int:
        return len(self.betas)

    @classmethod
    def from_vector(cls, betas, vec):
        k = len(betas)
        coeffs = tuple(
            {m: Fraction(vec[n * N_MONO + t]) for t, m in enumerate(MONOMIALS)} for n in range(k)
        )
        return cls(tuple(betas), coeffs)

    @classmethod
    def zero(cls, betas):
        return cls.from_vector(betas, [0] * (len(betas) * N_MONO))

    def vector(self):
        return [self.coeffs[n][m] for n in range(self.k) for m in MONOMIALS]

    def with_coefficient(self, n, mono, delta) -> "InvariantAnsatz":
        coeffs = [dict(c) for c in self.coeffs]
        coeffs[n][mono] = coeffs[n][mono] + Fraction(delta)
        return InvariantAnsatz(self.betas, tuple(coeffs))

    def __call__(self, x, y, n):
        c = self.coeffs[n % self.k]
        return sum(float(v) * x**i * y**j for (i, j), v in c.items() if v != 0)

    def to_strings(self):
        return [{f"x^{i}y^{j}": _frac_str(v) for (i, j), v in c.items() if v != 0} for c in self.coeffs]


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _check_betas(beta_cycle):
    betas = tuple(as_fraction(b) for b in beta_cycle)
    if not betas:
        raise DomainError("empty cycle")
    for b in betas:
        if not b > 0:
            raise NonPositiveBeta(f"beta must be positive, got {b}")
    return betas


def _phase_polys(beta):
    """For each monomial ``x^i y^j``: ``D^4 * (image monomial)`` and ``D^4 * x^i y^j``."""
    D = {(0, 0): beta, (0, 2): Fraction(1)}
    YD = {(1, 2): Fraction(-1), (1, 0): Fraction(-beta), (0, 1): Fraction(1)}  # Y * D = -x D + y
    D_pows = [_pow(D, e) for e in range(5)]
    YD_pows = [_pow(YD, e) for e in range(5)]
    image, current = [], []
    for i, j in MONOMIALS:
        # y^i Y^j D^4 = y^i (Y D)^j D^(4 - j)
        image.append(_mul(_mul({(0, i): Fraction(1)}, YD_pows[j]), D_pows[4 - j]))
        current.append(_mul({(i, j): Fraction(1)}, D_pows[4]))
    return image, current


def _integer_row(row):
    den = 1
    for c in row:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in row]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return tuple(v // g for v in ints) if g > 1 else tuple(ints)


def build_constraints(beta_cycle) -> ConstraintSystem:
    betas = _check_betas(beta_cycle)
    k = len(betas)
    n_unknowns = k * N_MONO
    rows = []
    for n, beta in enumerate(betas):
        image, current = _phase_polys(beta)
        nxt = (n + 1) % k
        by_mono: dict = {}
        for t in range(N_MONO):
            for key, c in image[t].items():
                by_mono.setdefault(key, {})
                col = nxt * N_MONO + t
                by_mono[key][col] = by_mono[key].get(col, 0) + c
            for key, c in current[t].items():
                by_mono.setdefault(key, {})
                col = n * N_MONO + t
                by_mono[key][col] = by_mono[key].get(col, 0) - c
        for key in sorted(by_mono):
            row = [Fraction(0)] * n_unknowns
            for col, c in by_mono[key].items():
                row[col] = Fraction(c)
            if any(row):
                rows.append(_integer_row(row))
    return ConstraintSystem(betas, tuple(rows), n_unknowns)


def bareiss_echelon(rows, n_cols):
    """Fraction-free row echelon form of an integer matrix; returns (rows, pivot columns)."""
    M = [list(r) for r in rows]
    pivots = []
    prev = 1
    r = 0
    for col in range(n_cols):
        piv = next((i for i in range(r, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(r + 1, len(M)):
            for j in range(col + 1, n_cols):
                M[i][j] = (M[r][col] * M[i][j] - M[i][col] * M[r][j]) // prev
            M[i][col] = 0
        prev = M[r][col]
        pivots.append(col)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def nullspace_vectors(rows, n_cols):
    """Exact rational basis of the kernel of an integer matrix."""
    if not rows:
        return [[Fraction(int(i == j)) for i in range(n_cols)] for j in range(n_cols)]
    E, pivots = bareiss_echelon(rows, n_cols)
    free = [c for c in range(n_cols) if c not in set(pivots)]
    basis = []
    for f in free:
        vec = [Fraction(0)] * n_cols
        vec[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            pc = pivots[r]
            s = sum((E[r][j] * vec[j] for j in range(pc + 1, n_cols) if E[r][j] != 0), Fraction(0))
            vec[pc] = -s / E[r][pc]
        basis.append(vec)
    return basis


def residual_polynomials(ansatz: InvariantAnsatz):
    """``D^4 (I(y, Y, n+1) - I(x, y, n))`` expanded exactly, one polynomial per phase."""
    out = []
    for n, beta in enumerate(ansatz.betas):
        image, current = _phase_polys(beta)
        nxt = (n + 1) % ansatz.k
        poly: Poly = {}
        for t, m in enumerate(MONOMIALS):
            poly = _add(poly, image[t], ansatz.coeffs[nxt][m])
            poly = _add(poly, current[t], -ansatz.coeffs[n][m])
        out.append(poly)
    return out


def solve_nullspace(system: ConstraintSystem) -> list:
    """Exact kernel basis as ansatz objects; each one is substituted back and must vanish identically."""
    basis = nullspace_vectors(system.rows, system.n_unknowns)
    out = []
    for vec in basis:
        ansatz = InvariantAnsatz.from_vector(system.betas, vec)
        if any(residual_polynomials(ansatz)):
            raise AssertionError("kernel vector fails exact back-substitution")
        out.append(ansatz)
    return out


def minimal_period(beta_cycle) -> int:
    betas = _check_betas(beta_cycle)
    k = len(betas)
    for d in range(1, k + 1):
        if k % d == 0 and all(betas[i] == betas[i % d] for i in range(k)):
            return d
    return k


@dataclass(frozen=True)
class SearchResult:
    betas: tuple
    minimal_period: int
    basis: tuple

    @property
    def exists(self) -> bool:
        return len(self.basis) > 0

    @property
    def inherited(self) -> bool:
        """The invariant comes from a shorter period of the cycle."""
        return self.exists and self.minimal_period < len(self.betas)


def search_invariant(beta_cycle) -> SearchResult:
    system = build_constraints(beta_cycle)
    return SearchResult(system.betas, minimal_period(system.betas), tuple(solve_nullspace(system)))


def matches_known_pattern(ansatz: InvariantAnsatz) -> bool:
    """True when the ansatz is ``c (beta_n x^2 + beta_{n+1} y^2 - xy + x^2 y^2)`` for one ``c``."""
    k = ansatz.k
    c = ansatz.coeffs[0][(2, 2)]
    for n in range(k):
        co = ansatz.coeffs[n]
        want = {(2, 0): c * ansatz.betas[n], (0, 2): c * ansatz.betas[(n + 1) % k],
                (1, 1): -c, (2, 2): c}
        for m in MONOMIALS:
            if co[m] != want.get(m, 0):
                return False
    return True


def verify_invariant(ansatz: InvariantAnsatz, beta_cycle, n_numeric_steps=10_000, n_seeds=5,
                     seed=0) -> float:
    """Max ``|I(x_{n+1}, x_{n+2}, n+1) - I(x_n, x_{n+1}, n)|`` along a few numerically iterated sequences."""
    betas = [float(b) for b in _check_betas(beta_cycle)]
    k = len(betas)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x, y in rng.uniform(-1.0, 1.0, size=(n_seeds, 2)):
        prev = ansatz(x, y, 0)
        for n in range(n_numeric_steps):
            x, y = y, -x + y / (betas[n % k] + y * y)
            cur = ansatz(x, y, n + 1)
            worst = max(worst, abs(cur - prev))
            prev = cur
    return worst


def known_invariant(beta_cycle, scale=1) -> Optional[InvariantAnsatz]:
    """``scale (beta_n x^2 + beta_{n+1} y^2 - xy + x^2 y^2)`` on the given cycle."""
    betas = _check_betas(beta_cycle)
    k = len(betas)
    s = Fraction(scale)
    coeffs = []
    for n in range(k):
        c = {m: Fraction(0) for m in MONOMIALS}
        c[(2, 0)] = s * betas[n]
        c[(0, 2)] = s * betas[(n + 1) % k]
        c[(1, 1)] = -s
        c[(2, 2)] = s
        coeffs.append(c)
    return InvariantAnsatz(betas, tuple(coeffs))
