"""Elementary Gumovski-Mira maps, their 2-periodic compositions and orbits.

Conventions used throughout the package:

* ``G_beta(x, y) = (y, -x + y / (beta + y**2))`` and
  ``F_alpha(x, y) = (y, -x + alpha * y / (1 + y**2))``.
* A composed map is always given by the pair ``(a, b)`` in application order:
  ``composed_g(a, b)`` is ``G_b o G_a``, i.e. ``G_{b,a}``.
* The scalar recurrence uses ``a`` on the first step, so that
  ``G_{b,a}(x1, x2) = (x3, x4)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from numba import njit

from .errors import DivergedOrbit, DomainError

DIVERGENCE_BOUND = 1e12


class PlanePoint(NamedTuple):
    x: float
    y: float


class Regime(enum.Enum):
    SUB_SIXTEENTH = "ab<1/16"
    BOUNDARY_16 = "ab=1/16"
    MID_RANGE = "1/16<ab<1/4"
    QUARTER = "ab=1/4"
    SUPER_QUARTER = "ab>1/4"


def regime_of(product: float) -> Regime:
    if product < 1 / 16:
        return Regime.SUB_SIXTEENTH
    if product == 1 / 16:
        return Regime.BOUNDARY_16
    if product < 1 / 4:
        return Regime.MID_RANGE
    if product == 1 / 4:
        return Regime.QUARTER
    return Regime.SUPER_QUARTER


@dataclass(frozen=True)
class ParamPair:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"parameters must be positive, got a={self.a}, b={self.b}")

    @property
    def product(self) -> float:
        return self.a * self.b

    @property
    def regime(self) -> Regime:
        return regime_of(self.product)


class Family(enum.Enum):
    G = "G"
    F = "F"


class MapKind(enum.Enum):
    ELEM_G = "ElemG"
    ELEM_F = "ElemF"
    COMPOSED_G = "ComposedG"
    COMPOSED_F = "ComposedF"


class Direction(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


@dataclass(frozen=True)
class MapSpec:
    kind: MapKind
    params: tuple
    direction: Direction = Direction.FORWARD

    def __post_init__(self):
        expected = 2 if self.kind in (MapKind.COMPOSED_G, MapKind.COMPOSED_F) else 1
        if len(self.params) != expected:
            raise DomainError(f"{self.kind.value} takes {expected} parameter(s)")
        if any(not p > 0 for p in self.params):
            raise DomainError(f"map parameters must be positive: {self.params}")

    @classmethod
    def elem_g(cls, beta, direction=Direction.FORWARD):
        return cls(MapKind.ELEM_G, (float(beta),), direction)

    @classmethod
    def elem_f(cls, alpha, direction=Direction.FORWARD):
        return cls(MapKind.ELEM_F, (float(alpha),), direction)

    @classmethod
    def composed_g(cls, a, b, direction=Direction.FORWARD):
        """``G_b o G_a``."""
        return cls(MapKind.COMPOSED_G, (float(a), float(b)), direction)

    @classmethod
    def composed_f(cls, a, b, direction=Direction.FORWARD):
        """``F_b o F_a``."""
        return cls(MapKind.COMPOSED_F, (float(a), float(b)), direction)

    @property
    def family(self) -> Family:
        return Family.G if self.kind in (MapKind.ELEM_G, MapKind.COMPOSED_G) else Family.F

    @property
    def backward(self) -> bool:
        return self.direction is Direction.BACKWARD

    def reversed(self) -> "MapSpec":
        flipped = Direction.FORWARD if self.backward else Direction.BACKWARD
        return MapSpec(self.kind, self.params, flipped)


def step_elem_G(beta, p):
    x, y = p
    return PlanePoint(y, -x + y / (beta + y * y))


def step_elem_F(alpha, p):
    x, y = p
    return PlanePoint(y, -x + alpha * y / (1.0 + y * y))


def _inv_elem_G(beta, p):
    u, v = p
    return PlanePoint(-v + u / (beta + u * u), u)


def _inv_elem_F(alpha, p):
    u, v = p
    return PlanePoint(-v + alpha * u / (1.0 + u * u), u)


_FORWARD = {Family.G: step_elem_G, Family.F: step_elem_F}
_INVERSE = {Family.G: _inv_elem_G, Family.F: _inv_elem_F}


def step_composed(spec: MapSpec, p):
    """One forward step of ``spec`` (elementary steps applied in order)."""
    f = _FORWARD[spec.family]
    for beta in spec.params:
        p = f(beta, p)
    return PlanePoint(*p)


def step_inverse(spec: MapSpec, p):
    """Exact inverse of one forward step of ``spec``."""
    g = _INVERSE[spec.family]
    for beta in reversed(spec.params):
        p = g(beta, p)
    return PlanePoint(*p)


def step(spec: MapSpec, p):
    """One step in the direction recorded in ``spec``. Works on arrays too."""
    return step_inverse(spec, p) if spec.backward else step_composed(spec, p)


def conjugacy_psi(alpha, p, inverse=False):
    """Linear conjugacy ``(x, y) -> sqrt(alpha) (x, y)`` taking G_{1/alpha} to F_alpha."""
    s = 1.0 / math.sqrt(alpha) if inverse else math.sqrt(alpha)
    return PlanePoint(p[0] * s, p[1] * s)


@njit(cache=True, nogil=True)
def _orbit_kernel(family, cycle, x, y, n, backward, bound):
    k = cycle.size
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    xs[0] = x
    ys[0] = y
    for i in range(n):
        for j in range(k):
            if backward:
                c = cycle[k - 1 - j]
                if family == 0:
                    x, y = -y + x / (c + x * x), x
                else:
                    x, y = -y + c * x / (1.0 + x * x), x
            else:
                c = cycle[j]
                if family == 0:
                    x, y = y, -x + y / (c + y * y)
                else:
                    x, y = y, -x + c * y / (1.0 + y * y)
        if not (abs(x) <= bound and abs(y) <= bound):
            return xs[: i + 1], ys[: i + 1], i
        xs[i + 1] = x
        ys[i + 1] = y
    return xs, ys, n


@dataclass
class OrbitSample:
    """Finite orbit ``p_0, ..., p_n`` of one map, stored column-wise."""

    spec: MapSpec
    x: np.ndarray
    y: np.ndarray
    trace: Optional[np.ndarray] = None

    def __len__(self):
        return self.x.size

    @property
    def start(self) -> PlanePoint:
        return PlanePoint(float(self.x[0]), float(self.y[0]))

    @property
    def steps(self) -> np.ndarray:
        n = np.arange(self.x.size)
        return -n if self.spec.backward else n

    @property
    def stride(self) -> int:
        """Elementary steps per recorded point."""
        return len(self.spec.params)

    def point(self, i) -> PlanePoint:
        return PlanePoint(float(self.x[i]), float(self.y[i]))

    @property
    def points(self):
        return [(int(n), self.point(i)) for i, n in enumerate(self.steps)]


def _run(spec, p0, n_steps, bound=DIVERGENCE_BOUND):
    fam = 0 if spec.family is Family.G else 1
    cycle = np.asarray(spec.params, dtype=np.float64)
    return _orbit_kernel(fam, cycle, float(p0[0]), float(p0[1]), int(n_steps), spec.backward, bound)


def iterate(spec: MapSpec, p0, n_steps: int, integral: Optional[Callable] = None) -> OrbitSample:
    """Orbit of length ``n_steps + 1`` starting at ``p0``.

    ``integral`` is any callable ``f(x, y)`` accepting arrays; its values fill
    ``trace``. Raises :class:`DivergedOrbit` (with the finite prefix attached)
    when a coordinate exceeds ``DIVERGENCE_BOUND`` or stops being finite.
    """
    if n_steps < 1:
        raise DomainError("n_steps must be >= 1")
    xs, ys, done = _run(spec, p0, n_steps)
    orbit = OrbitSample(spec, xs, ys)
    if integral is not None:
        orbit.trace = np.asarray(integral(xs, ys), dtype=np.float64)
    if done < n_steps:
        raise DivergedOrbit(done, orbit)
    return orbit


def recurrence_sequence(family, a, b, x1, x2, n_terms, direction=Direction.FORWARD):
    """Terms of ``x_{n+2} = -x_n + x_{n+1}/(beta_n + x_{n+1}^2)`` (G) or the F analogue.

    Forward returns ``x1, x2, x3, ...``. Backward returns the extension to
    negative indices in time-reversed order: ``x2, x1, x0, x_{-1}, ...``.
    """
    family = Family(family) if not isinstance(family, Family) else family
    direction = Direction(direction) if not isinstance(direction, Direction) else direction
    if n_terms < 2:
        raise DomainError("n_terms must be >= 2")
    ctor = MapSpec.composed_g if family is Family.G else MapSpec.composed_f
    spec = ctor(a, b, direction)
    n_iter = max(1, (n_terms - 1) // 2)
    xs, ys, done = _run(spec, (x1, x2), n_iter)
    if spec.backward:
        seq = np.column_stack((ys, xs)).ravel()
    else:
        seq = np.column_stack((xs, ys)).ravel()
    if done < n_iter:
        raise DivergedOrbit(2 * done + 1, OrbitSample(spec, xs, ys))
    return seq[:n_terms]
