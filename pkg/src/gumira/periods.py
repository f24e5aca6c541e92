"""Periodic orbits of ``G_{b,a}``: detection, the 2-periodic locus, levels with a
prescribed rational rotation number, and admissible periods by regime."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .dynamics import MapSpec, OrbitSample, PlanePoint, iterate
from .errors import DomainError, EmptyLevel, MaxIterations, NoBracket, WrongTopology
from .geometry import Branch, center_of, critical_values, default_branch, point_on_level, points_on_level
from .rotation import estimate_winding, limit_rho, rho_profile, winding_turns

DETECT_TOL = 1e-8
DETECT_MAX_Q = 200


@dataclass(frozen=True)
class PeriodReport:
    map_period: Optional[int] = None
    sequence_period: Optional[int] = None
    residual: float = math.inf

    @property
    def found(self) -> bool:
        return self.map_period is not None


def detect_period(orbit: OrbitSample, tol=DETECT_TOL, max_q=DETECT_MAX_Q) -> PeriodReport:
    """Smallest ``m <= max_q`` with ``|p_m - p_0| <= tol`` along ``orbit``."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    m_max = min(max_q, len(orbit) - 1)
    if m_max < 1:
        return PeriodReport()
    dist = np.hypot(orbit.x[1:m_max + 1] - orbit.x[0], orbit.y[1:m_max + 1] - orbit.y[0])
    hits = np.flatnonzero(dist <= tol)
    if hits.size == 0:
        return PeriodReport()
    m = int(hits[0]) + 1
    return PeriodReport(m, 2 * m, float(dist[hits[0]]))


def period_of_point(a, b, p, tol=DETECT_TOL, max_q=DETECT_MAX_Q) -> PeriodReport:
    return detect_period(iterate(MapSpec.composed_g(a, b), p, max_q), tol, max_q)


class LocusStatus(enum.Enum):
    PRESENT = "present"
    DEGENERATE = "degenerate"
    ABSENT = "absent"


@dataclass(frozen=True)
class TwoPeriodicLocus:
    status: LocusStatus
    h: Optional[float] = None
    points: tuple = ()
    residual: float = 0.0


def two_periodic_locus(a, b, n_points=10) -> TwoPeriodicLocus:
    """The ovals ``{V_{b,a} = -ab}`` (for ``ab < 1/16``), sampled and checked against ``G^2 = id``."""
    if not (a > 0 and b > 0):
        raise DomainError("parameters must be positive")
    ab = a * b
    if ab > 1 / 16:
        return TwoPeriodicLocus(LocusStatus.ABSENT)
    h = -ab
    if ab == 1 / 16:
        pair = [center_of(a, b, br) for br in (Branch.POSITIVE_OVAL, Branch.NEGATIVE_OVAL)]
        return TwoPeriodicLocus(LocusStatus.DEGENERATE, h, tuple(pair), 0.0)
    half = (n_points + 1) // 2
    pts = points_on_level(a, b, h, Branch.POSITIVE_OVAL, half)
    pts += points_on_level(a, b, h, Branch.NEGATIVE_OVAL, n_points - half)
    spec = MapSpec.composed_g(a, b)
    residual = max(math.dist(iterate(spec, p, 2).point(2), p) for p in pts)
    return TwoPeriodicLocus(LocusStatus.PRESENT, h, tuple(pts), residual)


def d_polynomial(y, a, b):
    """Discriminant in ``x`` used to locate the 2-periodic points (exposed for tests only)."""
    return -4 * b * y**4 + (1 - 8 * a * b) * y * y - 4 * a * a * b


@dataclass(frozen=True)
class ResonantLevel:
    h: float
    rho: float
    residual: float
    q: int
    seed: PlanePoint = field(default=PlanePoint(0.0, 0.0))


def _displacement(a, b, h, branch, target):
    """Turns swept in ``q`` iterates minus ``p``; its sign is the sign of ``rho(h) - p/q``."""
    p = point_on_level(a, b, h, branch)
    turns, _ = winding_turns(a, b, p, center_of(a, b, branch), target.denominator)
    return turns - target.numerator


def find_level_with_rho(a, b, target, h_bracket, branch=None, n_check=200_000,
                        rho_tol=1e-6, orbit_tol=1e-5, max_iter=200) -> ResonantLevel:
    """Level ``h`` in ``h_bracket`` with rotation number ``target = p/q``.

    Roots ``q``-step displacement minus ``p``: on an invariant circle its sign
    agrees with ``rho - p/q``, so the root is where the level closes up after
    ``q`` iterates. The result is checked with a long winding estimate and by
    the return distance after ``q`` steps.
    """
    target = Fraction(target)
    if target.denominator < 1 or not 0 <= target <= 1:
        raise DomainError(f"target must be a fraction in [0, 1], got {target}")
    lo, hi = map(float, h_bracket)
    branch = default_branch(lo) if branch is None else Branch(branch)
    try:
        g_lo = _displacement(a, b, lo, branch, target)
        g_hi = _displacement(a, b, hi, branch, target)
    except (EmptyLevel, WrongTopology) as exc:
        raise NoBracket(f"bracket endpoint is not a closed oval: {exc}") from exc
    if g_lo == 0:
        hi = lo
    elif g_hi == 0:
        lo = hi
    elif (g_lo > 0) == (g_hi > 0):
        raise NoBracket(f"rho - {target} has the same sign at both ends of [{lo}, {hi}]")
    if lo != hi:
        try:
            h = brentq(lambda h: _displacement(a, b, h, branch, target), lo, hi,
                       xtol=1e-15 * max(1.0, abs(lo), abs(hi)), rtol=4 * np.finfo(float).eps,
                       maxiter=max_iter)
        except RuntimeError as exc:
            raise MaxIterations(str(exc)) from exc
    else:
        h = lo
    est = estimate_winding(a, b, h, branch, n_check)
    seed = point_on_level(a, b, h, branch)
    orbit = iterate(MapSpec.composed_g(a, b), seed, target.denominator)
    residual = math.dist(orbit.point(target.denominator), seed)
    if abs(est.rho - float(target)) > rho_tol or residual > orbit_tol:
        raise MaxIterations(
            f"level h={h} gives rho={est.rho:.9f}, return residual {residual:.2e}")
    return ResonantLevel(h, est.rho, residual, target.denominator, seed)


def sweep_bracket(a, b, target, h_lo, h_hi, branch=None, n=200, log=False, n_iterates=20_000):
    """First pair of neighbouring levels on an ``n``-point sweep where ``rho - target`` changes sign."""
    hs = np.geomspace(h_lo, h_hi, n) if log else np.linspace(h_lo, h_hi, n)
    rho = rho_profile(a, b, hs, branch, n_iterates)
    diff = rho - float(Fraction(target))
    ok = np.isfinite(diff)
    for i in range(n - 1):
        if ok[i] and ok[i + 1] and diff[i] * diff[i + 1] <= 0:
            return float(hs[i]), float(hs[i + 1])
    lo_r, hi_r = np.nanmin(rho), np.nanmax(rho)
    raise NoBracket(f"target {target} outside sampled range [{lo_r:.6f}, {hi_r:.6f}]")


def _coprime_in(q, lo, hi):
    """Some ``p`` with ``gcd(p, q) = 1`` and ``lo < p/q < hi``, else None."""
    for p in range(math.floor(lo * q) + 1, math.ceil(hi * q)):
        if math.gcd(p, q) == 1 and lo < p / q < hi:
            return p
    return None


def admissible_periods(a, b, q_max) -> list:
    if q_max < 2:
        raise DomainError("q_max must be >= 2")
    ab = a * b
    if ab < 1 / 16:
        return list(range(2, q_max + 1))
    if ab <= 0.25:
        return list(range(3, q_max + 1))
    lo = limit_rho(a, b, "zero+")
    return [q for q in range(1, q_max + 1) if _coprime_in(q, lo, 0.5) is not None]


def witness_fraction(a, b, q) -> Optional[Fraction]:
    """A rotation number ``p/q`` realised on some level, if ``q`` is admissible."""
    if q not in admissible_periods(a, b, max(q, 2)):
        return None
    ab = a * b
    if ab > 0.25:
        return Fraction(_coprime_in(q, limit_rho(a, b, "zero+"), 0.5), q)
    return Fraction(1, q)


def operational_q0(a, b, q_max) -> Optional[int]:
    """Smallest ``q`` such that every ``q'`` in ``[q, q_max]`` is admissible."""
    adm = set(admissible_periods(a, b, q_max))
    q0 = None
    for q in range(q_max, 0, -1):
        if q not in adm:
            break
        q0 = q
    return q0


def two_periodic_bracket(a, b):
    """Bracket around ``-ab`` inside ``(h_min, 0)`` for the 1/2 level."""
    cv = critical_values(a, b)
    return cv.h_min + 1e-3 * abs(cv.h_min), -1e-6
