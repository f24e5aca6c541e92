"""Fixed points, critical levels and level-set geometry of ``V_{b,a}``.

``V_{b,a}(x, y) = a x^2 + b y^2 - xy + x^2 y^2`` is the integral of ``G_b o G_a``;
``V_{a,b}`` swaps the roles of ``a`` and ``b``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import MapSpec, PlanePoint, step_composed
from .errors import BranchMismatch, DomainError, EmptyLevel
from .invariants import IntegralSpec, eval_integral

FIXED_POINT_TOL = 1e-10


class Topology(enum.Enum):
    EMPTY = "Empty"
    ORIGIN_ONLY = "OriginOnly"
    SINGLE_OVAL = "SingleOval"
    TWO_OVALS = "TwoOvals"
    HOMOCLINIC_FIGURE = "HomoclinicFigure"
    POINT_PAIR = "PointPair"


class Branch(enum.Enum):
    POSITIVE_OVAL = "positive"
    NEGATIVE_OVAL = "negative"
    MAIN = "main"


@dataclass(frozen=True)
class IntervalSet:
    """Sorted disjoint closed intervals."""

    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple((float(lo), float(hi)) for lo, hi in self.intervals)
        for lo, hi in ivs:
            if hi < lo:
                raise ValueError(f"bad interval [{lo}, {hi}]")
        for (_, h0), (l1, _) in zip(ivs, ivs[1:]):
            if not h0 < l1:
                raise ValueError("intervals must be increasing and disjoint")
        object.__setattr__(self, "intervals", ivs)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __getitem__(self, i):
        return self.intervals[i]

    @property
    def count(self):
        return len(self.intervals)

    def contains(self, x, tol=0.0) -> bool:
        return any(lo - tol <= x <= hi + tol for lo, hi in self.intervals)

    def covers(self, other: "IntervalSet", tol=0.0) -> bool:
        """True when every interval of ``other`` sits inside one interval of ``self`` dilated by ``tol``."""
        return all(
            any(lo - tol <= olo and ohi <= hi + tol for lo, hi in self.intervals)
            for olo, ohi in other.intervals
        )

    @classmethod
    def union(cls, *sets: "IntervalSet") -> "IntervalSet":
        pieces = sorted(iv for s in sets for iv in s.intervals)
        merged = []
        for lo, hi in pieces:
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple(map(tuple, merged)))

    def to_list(self):
        return [list(iv) for iv in self.intervals]


@dataclass(frozen=True)
class FixedPointSet:
    origin: PlanePoint
    pair: Optional[tuple]  # (P_plus, P_minus) when ab < 1/4
    residual: float = 0.0


@dataclass(frozen=True)
class CriticalValues:
    h_min: float
    h_plus: float
    h_minus: float


@dataclass(frozen=True)
class LevelDescriptor:
    h: float
    topology: Topology
    projection_V_ba: Optional[IntervalSet]
    projection_V_ab: Optional[IntervalSet]


def _check_positive(a, b):
    if not (a > 0 and b > 0):
        raise DomainError(f"parameters must be positive, got a={a}, b={b}")


def _pair_coordinates(a, b):
    return (
        math.sqrt(-b + 0.5 * math.sqrt(b / a)),
        math.sqrt(-a + 0.5 * math.sqrt(a / b)),
    )


def fixed_points(a, b) -> FixedPointSet:
    _check_positive(a, b)
    origin = PlanePoint(0.0, 0.0)
    if a * b >= 0.25:
        return FixedPointSet(origin, None, 0.0)
    xp, yp = _pair_coordinates(a, b)
    plus, minus = PlanePoint(xp, yp), PlanePoint(-xp, -yp)
    spec = MapSpec.composed_g(a, b)
    residual = max(math.dist(step_composed(spec, p), p) for p in (plus, minus))
    if residual > FIXED_POINT_TOL:
        raise AssertionError(f"fixed point self-check failed: residual {residual:.3e}")
    return FixedPointSet(origin, (plus, minus), residual)


def critical_values(a, b) -> CriticalValues:
    """``h_min`` and the two roots ``h_+ > h_-`` of ``P1(h)``."""
    _check_positive(a, b)
    ab = a * b
    h_min = -0.25 - ab + math.sqrt(ab)
    # 16 h^2 + B h + C with B > 0, C >= 0: both roots are <= 0
    B = 16 * a * a + 16 * b * b + 8
    C = (4 * ab - 1) ** 2
    disc = (16.0 * (a + b) ** 2) * (16.0 * ((a - b) ** 2 + 1))  # B^2 - 64 C, factored
    q = -0.5 * (B + math.sqrt(disc))
    h_minus = q / 16.0
    h_plus = C / q
    scale = B * abs(h_minus) + C
    for h in (h_plus, h_minus):
        if abs(p1_polynomial(h, a, b)) > 1e-10 * max(1.0, scale):
            raise AssertionError("critical value self-check failed")
    return CriticalValues(h_min, h_plus, h_minus)


def p1_polynomial(h, a, b):
    return 16 * h * h + (16 * a * a + 16 * b * b + 8) * h + (4 * a * b - 1) ** 2


def p2_polynomial(h, a, b):
    return (h + a * b + 0.25) ** 2 - a * b


def level_min(a, b) -> float:
    """Minimum value of ``V_{b,a}`` over the plane."""
    ab = a * b
    return -0.25 - ab + math.sqrt(ab) if ab < 0.25 else 0.0


def discriminant_R(which, x, h, a, b):
    """Discriminant in ``y`` of ``V - h``; ``R1`` for ``V_{b,a}``, ``R2`` for ``V_{a,b}``."""
    if which == "R1":
        c4, c0 = a, b
    elif which == "R2":
        c4, c0 = b, a
    else:
        raise ValueError(f"which must be 'R1' or 'R2', got {which!r}")
    return -4 * c4 * x**4 + (-4 * a * b + 4 * h + 1) * x * x + 4 * c0 * h


def _u_roots(a, b, h):
    """Roots in ``u = x^2`` of ``-4a u^2 + (1 - 4ab + 4h) u + 4bh`` (small, big); None if complex."""
    B = 1 - 4 * a * b + 4 * h
    disc = B * B + 64 * a * b * h
    if disc < 0:
        if disc > -1e-13 * max(1.0, B * B):
            disc = 0.0
        else:
            return None
    sq = math.sqrt(disc)
    if B >= 0:
        big = (B + sq) / (8 * a)
        small = (-b * h / a) / big if big != 0 else 0.0
    else:
        small = (B - sq) / (8 * a)
        big = (-b * h / a) / small if small != 0 else 0.0
        small, big = min(small, big), max(small, big)
    return small, big


def _projection(a, b, h) -> IntervalSet:
    """x-projection of ``{a x^2 + b y^2 - xy + x^2 y^2 = h}``."""
    if h < level_min(a, b) - 1e-15:
        raise EmptyLevel(f"h={h} below the minimum {level_min(a, b)}")
    roots = _u_roots(a, b, h)
    if h > 0:
        r = math.sqrt(roots[1])
        return IntervalSet(((-r, r),))
    if h == 0:
        big = max(roots[1], 0.0)
        r = math.sqrt(big)
        return IntervalSet(((-r, r),))
    if roots is None:
        # h within rounding of h_min: collapse onto the fixed points
        xp = _pair_coordinates(a, b)[0]
        return IntervalSet(((-xp, -xp), (xp, xp)))
    lo, hi = math.sqrt(max(roots[0], 0.0)), math.sqrt(max(roots[1], 0.0))
    return IntervalSet(((-hi, -lo), (lo, hi)))


def level_projection(a, b, h, which="V_ba") -> IntervalSet:
    """Projection on the x-axis of ``{V_{b,a} = h}`` (``which='V_ba'``) or ``{V_{a,b} = h}``."""
    _check_positive(a, b)
    if which == "V_ba":
        return _projection(a, b, h)
    if which == "V_ab":
        return _projection(b, a, h)
    raise ValueError(f"which must be 'V_ba' or 'V_ab', got {which!r}")


def level_topology(a, b, h) -> LevelDescriptor:
    _check_positive(a, b)
    ab = a * b
    if ab >= 0.25:
        if h > 0:
            topo = Topology.SINGLE_OVAL
        elif h == 0:
            topo = Topology.ORIGIN_ONLY
        else:
            topo = Topology.EMPTY
    else:
        h_min = critical_values(a, b).h_min
        if h > 0:
            topo = Topology.SINGLE_OVAL
        elif h == 0:
            topo = Topology.HOMOCLINIC_FIGURE
        elif h > h_min:
            topo = Topology.TWO_OVALS
        elif h == h_min:
            topo = Topology.POINT_PAIR
        else:
            topo = Topology.EMPTY
    if topo is Topology.EMPTY:
        return LevelDescriptor(h, topo, None, None)
    return LevelDescriptor(h, topo, _projection(a, b, h), _projection(b, a, h))


def _y_roots(a, b, h, x):
    """Both roots in y of ``(x^2 + b) y^2 - x y + (a x^2 - h) = 0`` (may raise on negative discriminant)."""
    A = x * x + b
    disc = x * x - 4 * A * (a * x * x - h)
    if disc < 0:
        if disc > -1e-12 * max(1.0, x * x):
            disc = 0.0
        else:
            raise EmptyLevel(f"vertical line x={x} misses the level {h}")
    sq = math.sqrt(disc)
    q = 0.5 * (x + math.copysign(sq, x)) if x != 0 else 0.5 * sq
    if q == 0:
        return 0.0, 0.0
    r1 = q / A
    r2 = (a * x * x - h) / q
    return max(r1, r2), min(r1, r2)


def default_branch(h) -> Branch:
    return Branch.MAIN if h > 0 else Branch.POSITIVE_OVAL


def _check_branch(a, b, h, branch):
    if h < level_min(a, b):
        raise EmptyLevel(f"h={h} below the minimum {level_min(a, b)}")
    if branch is Branch.MAIN:
        if h < 0 or (h == 0 and a * b < 0.25):
            raise BranchMismatch(f"no main oval at h={h}")
    elif a * b >= 0.25 or h > 0:
        raise BranchMismatch(f"no {branch.value} oval at h={h} (ab={a * b})")


def point_on_level(a, b, h, branch: Branch = None) -> PlanePoint:
    """A point of ``{V_{b,a} = h}`` on the requested component."""
    _check_positive(a, b)
    branch = default_branch(h) if branch is None else Branch(branch)
    _check_branch(a, b, h, branch)
    if branch is Branch.MAIN:
        return PlanePoint(0.0, math.sqrt(h / b))
    xp, _ = _pair_coordinates(a, b)
    y, _ = _y_roots(a, b, h, xp)
    if branch is Branch.NEGATIVE_OVAL:
        return PlanePoint(-xp, -y)
    return PlanePoint(xp, y)


def points_on_level(a, b, h, branch: Branch = None, n=10) -> list:
    """``n`` points spread over one component of ``{V_{b,a} = h}`` (vertical-line sampling)."""
    _check_positive(a, b)
    branch = default_branch(h) if branch is None else Branch(branch)
    _check_branch(a, b, h, branch)
    proj = _projection(a, b, h)
    lo, hi = proj[-1]
    if branch is Branch.MAIN:
        lo, hi = proj[0]
    m = (n + 1) // 2
    pts = []
    for i in range(m):
        x = lo + (hi - lo) * (i + 0.5) / m
        up, down = _y_roots(a, b, h, x)
        pts.extend([PlanePoint(x, up), PlanePoint(x, down)])
    pts = pts[:n]
    if branch is Branch.NEGATIVE_OVAL:
        pts = [PlanePoint(-p.x, -p.y) for p in pts]
    return pts


def center_of(a, b, branch: Branch) -> PlanePoint:
    """Point enclosed by the oval: the origin for the main oval, ``P_+``/``P_-`` otherwise."""
    branch = Branch(branch)
    if branch is Branch.MAIN:
        return PlanePoint(0.0, 0.0)
    xp, yp = _pair_coordinates(a, b)
    return PlanePoint(xp, yp) if branch is Branch.POSITIVE_OVAL else PlanePoint(-xp, -yp)


def level_value(a, b, p) -> float:
    return float(eval_integral(IntegralSpec.V(a, b), p))


def sample_grid(lo=-5.0, hi=5.0, n=100):
    """``n x n`` regular grid over ``[lo, hi]^2`` as an ``(n*n, 2)`` array."""
    t = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(t, t)
    return np.column_stack((X.ravel(), Y.ravel()))
