"""Rotation numbers of ``G_{b,a}`` on the invariant ovals of ``V_{b,a}``.

Orientation convention: the composed map turns the ovals against the
Hamiltonian field ``X_{b,a} = (-dV/dy, dV/dx)``. Rotation numbers are
measured in that (map) direction, which puts ``rho(0+) = arccos(1/(2ab) - 1)/2pi``
and ``rho(+inf) = 1/2`` for ``h > 0``. Near ``P_+-`` the measured value is the
closed-form limit when ``ab >= 1/16`` and one minus it when ``ab < 1/16``;
see :func:`limit_rho`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .dynamics import MapSpec, PlanePoint, step_composed
from .errors import DomainError, EmptyLevel, IntegrationFailure, NoReturn, WrongTopology
from .geometry import Branch, Topology, center_of, default_branch, level_topology, point_on_level

TWO_PI = 2.0 * math.pi
EPS = np.finfo(float).eps


class Method(enum.Enum):
    WINDING = "winding"
    FLOW = "flow"


class LimitPoint(enum.Enum):
    AT_ZERO_PLUS = "zero+"
    AT_INFINITY = "infinity"
    AT_PPM = "P+-"


@dataclass(frozen=True)
class FlowTiming:
    T: float
    tau: float
    return_residual: float = 0.0
    max_level_drift: float = 0.0
    n_steps: int = 0


@dataclass(frozen=True)
class RotationEstimate:
    rho: float
    method: Method
    uncertainty: float
    n_iterates: int = 0
    flagged: bool = False
    timing: Optional[FlowTiming] = None


def vector_field_X(a, b, p):
    """``X_{b,a}(x, y) = (x - 2by - 2x^2 y, 2ax - y + 2xy^2)``."""
    x, y = p
    return (x - 2 * b * y - 2 * x * x * y, 2 * a * x - y + 2 * x * y * y)


@njit(cache=True, nogil=True)
def _winding_kernel(a, b, x, y, cx, cy, n):
    """Total angle (radians) swept by ``n`` iterates, measured against X.

    Also counts iterates where ``(p - c) x X(p)`` changes sign relative to the
    seed, i.e. where the oval fails to be star-shaped about ``c``.
    """
    fx = x - 2 * b * y - 2 * x * x * y
    fy = 2 * a * x - y + 2 * x * y * y
    cross0 = (x - cx) * fy - (y - cy) * fx
    orient = -1.0 if cross0 > 0 else 1.0
    th = math.atan2(y - cy, x - cx)
    total = 0.0
    bad = 0
    for _ in range(n):
        x, y = y, -x + y / (a + y * y)
        x, y = y, -x + y / (b + y * y)
        th2 = math.atan2(y - cy, x - cx)
        total += (orient * (th2 - th)) % (2.0 * math.pi)
        th = th2
        fx = x - 2 * b * y - 2 * x * x * y
        fy = 2 * a * x - y + 2 * x * y * y
        if ((x - cx) * fy - (y - cy) * fx) * cross0 <= 0:
            bad += 1
    return total, bad


def winding_turns(a, b, p, center, n):
    """Turns swept by ``n`` iterates of ``G_{b,a}`` from ``p`` around ``center``; (turns, star_violations)."""
    total, bad = _winding_kernel(float(a), float(b), float(p[0]), float(p[1]),
                                 float(center[0]), float(center[1]), int(n))
    return total / TWO_PI, int(bad)


def _validate_level(a, b, h, branch):
    topo = level_topology(a, b, h).topology
    if topo is Topology.EMPTY:
        raise EmptyLevel(f"level h={h} is empty")
    if topo not in (Topology.SINGLE_OVAL, Topology.TWO_OVALS):
        raise WrongTopology(f"level h={h} has topology {topo.value}; rotation number undefined")
    return default_branch(h) if branch is None else Branch(branch)


def estimate_winding(a, b, h, branch=None, n_iterates=100_000, seed=None) -> RotationEstimate:
    """Rotation number from the mean angle advanced per iterate.

    Falls back to :func:`flow_rotation` (and flags the estimate) when the oval
    is not star-shaped about its center, where angle increments stop tracking
    the position along the oval.
    """
    if n_iterates < 1000:
        raise DomainError("n_iterates must be >= 1000")
    branch = _validate_level(a, b, h, branch)
    p = point_on_level(a, b, h, branch) if seed is None else seed
    turns, bad = winding_turns(a, b, p, center_of(a, b, branch), n_iterates)
    if bad:
        _, est = flow_rotation(a, b, h, branch)
        return RotationEstimate(est.rho, Method.FLOW, est.uncertainty, n_iterates, True, est.timing)
    return RotationEstimate(turns / n_iterates, Method.WINDING, 1.0 / n_iterates, n_iterates)


# flow of -X: the direction in which G_{b,a} advances along the ovals
def _field(a, b, x, y):
    return (-x + 2 * b * y + 2 * x * x * y, -2 * a * x + y - 2 * x * y * y)


def _rk4(a, b, x, y, dt):
    k1x, k1y = _field(a, b, x, y)
    k2x, k2y = _field(a, b, x + 0.5 * dt * k1x, y + 0.5 * dt * k1y)
    k3x, k3y = _field(a, b, x + 0.5 * dt * k2x, y + 0.5 * dt * k2y)
    k4x, k4y = _field(a, b, x + dt * k3x, y + dt * k3y)
    return (x + dt * (k1x + 2 * k2x + 2 * k3x + k4x) / 6.0,
            y + dt * (k1y + 2 * k2y + 2 * k3y + k4y) / 6.0)


def _doubled_step(a, b, x, y, dt):
    """RK4 step with step doubling; returns (x, y, error estimate) with local extrapolation."""
    x1, y1 = _rk4(a, b, x, y, dt)
    xm, ym = _rk4(a, b, x, y, 0.5 * dt)
    x2, y2 = _rk4(a, b, xm, ym, 0.5 * dt)
    ex, ey = (x2 - x1) / 15.0, (y2 - y1) / 15.0
    return x2 + ex, y2 + ey, math.hypot(ex, ey)


class _Section:
    """Line through ``target`` normal to the flow there; crossed from - to +."""

    def __init__(self, a, b, target, radius):
        self.tx, self.ty = target
        self.nx, self.ny = _field(a, b, self.tx, self.ty)
        self.radius = radius
        self.time = None
        self.point = None

    def g(self, x, y):
        return (x - self.tx) * self.nx + (y - self.ty) * self.ny

    def near(self, x, y):
        return math.hypot(x - self.tx, y - self.ty) < self.radius


def _refine(a, b, sec, x0, y0, dt, g0, g1, tol=1e-15):
    """Illinois regula falsi on the sub-step length; returns (s, x, y)."""
    lo, hi, glo, ghi = 0.0, dt, g0, g1
    s, xs, ys = dt, None, None
    side = 0
    for _ in range(100):
        s = (lo * ghi - hi * glo) / (ghi - glo)
        xs, ys, _ = _doubled_step(a, b, x0, y0, s)
        gs = sec.g(xs, ys)
        if gs == 0 or hi - lo < tol * max(1.0, dt):
            break
        if (gs < 0) == (glo < 0):
            lo, glo = s, gs
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi, ghi = s, gs
            if side == 1:
                glo *= 0.5
            side = 1
        if abs(hi - lo) <= 1e-10 * max(1e-3, dt) and abs(gs) < 1e-14:
            break
    return s, xs, ys


def flow_timing(a, b, p, tol=1e-10, max_steps=2_000_000, t_max=1e6) -> FlowTiming:
    """Period ``T`` of the closed flow orbit through ``p`` and flow time ``tau`` to ``G_{b,a}(p)``.

    The local error of each RK4 step-doubling step is kept below
    ``tol * dt * max(1, |X|)``, i.e. ``tol`` per unit time on slow orbits and
    per unit arc length on fast ones.
    """
    x, y = float(p[0]), float(p[1])
    h = x * x * (y * y + a) + b * y * y - x * y
    q = step_composed(MapSpec.composed_g(a, b), (x, y))
    span = max(1e-12, math.hypot(x, y), math.hypot(*q))
    ret = _Section(a, b, (x, y), 1e-6 * span)
    img = _Section(a, b, q, 1e-6 * span)
    speed = math.hypot(ret.nx, ret.ny)
    if speed == 0:
        raise WrongTopology("seed is an equilibrium of the flow")
    dt = 1e-3 * span / speed
    t = 0.0
    drift = 0.0
    hscale = max(1.0, abs(h))
    left_start = False
    for n in range(max_steps):
        xn, yn, err = _doubled_step(a, b, x, y, dt)
        allowed = max(tol * dt * max(1.0, math.hypot(*_field(a, b, x, y))),
                      64 * EPS * max(1.0, abs(x), abs(y)))
        if not err <= allowed:
            dt *= max(0.2, 0.9 * (allowed / err) ** 0.25) if math.isfinite(err) else 0.2
            if dt * speed < 1e-14 * span:
                raise IntegrationFailure(f"step size underflow at t={t}")
            continue
        for sec in (img, ret):
            if sec.time is not None:
                continue
            if sec is ret and not left_start:
                continue
            g0, g1 = sec.g(x, y), sec.g(xn, yn)
            if g0 < 0 <= g1:
                s, xs, ys = _refine(a, b, sec, x, y, dt, g0, g1)
                # the section line also cuts the oval far from the target; skip those
                if sec.near(xs, ys):
                    sec.time, sec.point = t + s, (xs, ys)
        if not left_start and ret.g(xn, yn) < 0:
            left_start = True
        if ret.time is not None:
            residual = math.dist(ret.point, (float(p[0]), float(p[1])))
            if img.time is None:
                raise NoReturn("flow closed before reaching the image point")
            return FlowTiming(ret.time, img.time, residual, drift, n)
        x, y, t = xn, yn, t + dt
        drift = max(drift, abs(x * x * (y * y + a) + b * y * y - x * y - h) / hscale)
        if t > t_max:
            break
        if err > 0:
            dt *= min(4.0, max(0.2, 0.9 * (allowed / err) ** 0.25))
        else:
            dt *= 4.0
    raise NoReturn(f"no return to the seed within t={t:.3g}")


def _flow_seed(a, b, h, branch):
    """Seed on the diagonal ray for the main oval; the x = 0 seed sits on a needle-thin arm tip when h is large."""
    if branch is not Branch.MAIN:
        return point_on_level(a, b, h, branch)
    # V(r/sqrt2, r/sqrt2) = r^4/4 + (a + b - 1) r^2 / 2 = h, solved for r^2
    B = 0.5 * (a + b - 1)
    disc = B * B + h
    r2 = 2 * h / (B + math.sqrt(disc)) if B >= 0 else 2 * (math.sqrt(disc) - B)
    r = math.sqrt(r2 / 2)
    return PlanePoint(r, r)


def flow_rotation(a, b, h, branch=None, tol=1e-10):
    """Rotation number as ``tau / T`` from the Hamiltonian flow interpretation."""
    branch = _validate_level(a, b, h, branch)
    p = _flow_seed(a, b, h, branch)
    timing = flow_timing(a, b, p, tol=tol)
    rho = timing.tau / timing.T
    unc = max(1e-12, 10 * tol * timing.T)
    return timing, RotationEstimate(rho, Method.FLOW, unc, 0, False, timing)


def limit_rho(a, b, where, oriented=False) -> float:
    """Closed-form limits of the rotation number.

    ``AT_PPM`` is the limit as the level shrinks to ``P_+-`` (requires ``ab < 1/4``).
    The closed form lies in ``[0, 1/2]``; with ``oriented=True`` it is reported in
    the map's own orientation, which is ``1 - value`` when ``ab < 1/16``.
    """
    where = LimitPoint(where)
    ab = a * b
    if where is LimitPoint.AT_INFINITY:
        return 0.5
    if where is LimitPoint.AT_ZERO_PLUS:
        if ab < 0.25:
            return 0.0
        return math.acos(1.0 / (2 * ab) - 1.0) / TWO_PI
    if ab >= 0.25:
        raise DomainError("the limit at P+- needs ab < 1/4")
    s = math.sqrt(ab)
    arg = min(1.0, max(-1.0, 1 - 16 * s + 32 * ab))
    value = math.acos(arg) / TWO_PI
    if oriented and ab < 1 / 16:
        return 1.0 - value
    return value


def spec_DG_origin(a, b):
    """Eigenvalues ``(lambda+, lambda-)`` of the Jacobian of ``G_{b,a}`` at the origin."""
    ab = a * b
    if ab < 0.25:
        # real pair lambda, 1/lambda; take the small one as a reciprocal to avoid cancellation
        big = (1 - 2 * ab + math.sqrt(1 - 4 * ab)) / (2 * ab)
        return complex(big, 0.0), complex(1.0 / big, 0.0)
    root = cmath.sqrt(1 - 4 * ab)
    return (1 - 2 * ab + root) / (2 * ab), (1 - 2 * ab - root) / (2 * ab)


def jacobian_fd(spec, p, eps=1e-6):
    """Central finite-difference Jacobian of one step of ``spec`` at ``p``."""
    x, y = p
    J = np.empty((2, 2))
    for j, (dx, dy) in enumerate(((eps, 0.0), (0.0, eps))):
        fp = step_composed(spec, (x + dx, y + dy))
        fm = step_composed(spec, (x - dx, y - dy))
        J[0, j] = (fp[0] - fm[0]) / (2 * eps)
        J[1, j] = (fp[1] - fm[1]) / (2 * eps)
    return J


def rho_profile(a, b, hs, branch=None, n_iterates=20_000):
    """Winding estimates on each level in ``hs`` (NaN where undefined)."""
    out = []
    for h in hs:
        try:
            out.append(estimate_winding(a, b, h, branch, n_iterates).rho)
        except (EmptyLevel, WrongTopology):
            out.append(float("nan"))
    return np.array(out)
