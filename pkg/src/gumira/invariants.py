"""First integrals of the composed maps and the phase-dependent invariant."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import OrbitSample, step_elem_G
from .errors import DomainError


class IntegralKind(enum.Enum):
    V = "V"
    W = "W"
    I = "I"


@dataclass(frozen=True)
class IntegralSpec:
    """Which integral to evaluate.

    ``V(a, b)`` is ``a x^2 + b y^2 - xy + x^2 y^2``, the integral of ``G_b o G_a``.
    ``W(a)`` is ``x^2 y^2 + x^2 + y^2 - a xy``, the integral of ``F_a``.
    ``I(cycle, phase)`` is ``c_n x^2 + c_{n+1} y^2 - xy + x^2 y^2`` with
    ``n = phase mod len(cycle)``; the step at phase ``n`` uses ``c_n``.
    """

    kind: IntegralKind
    params: tuple
    phase: int = 0

    def __post_init__(self):
        if not self.params or any(not p > 0 for p in self.params):
            raise DomainError(f"integral parameters must be positive: {self.params}")
        if self.kind is IntegralKind.I:
            object.__setattr__(self, "phase", self.phase % len(self.params))

    @classmethod
    def V(cls, a, b):
        return cls(IntegralKind.V, (float(a), float(b)))

    @classmethod
    def W(cls, a):
        return cls(IntegralKind.W, (float(a),))

    @classmethod
    def I(cls, cycle, phase=0):
        return cls(IntegralKind.I, tuple(float(c) for c in cycle), phase)

    def at_phase(self, phase) -> "IntegralSpec":
        return IntegralSpec(self.kind, self.params, phase)

    def __call__(self, x, y):
        return eval_integral(self, (x, y))


def _quartic(x, y, cx, cy):
    # cx x^2 + cy y^2 - xy + x^2 y^2, grouped to limit cancellation
    return x * x * (y * y + cx) + cy * (y * y) - x * y


def eval_integral(spec: IntegralSpec, p):
    x, y = p
    if spec.kind is IntegralKind.V:
        a, b = spec.params
        return _quartic(x, y, a, b)
    if spec.kind is IntegralKind.W:
        (a,) = spec.params
        return x * x * (y * y + 1.0) + y * y - a * (x * y)
    c = spec.params
    n = spec.phase
    return _quartic(x, y, c[n], c[(n + 1) % len(c)])


def drift_profile(spec: IntegralSpec, orbit: OrbitSample):
    """``(max |I(p_k) - I(p_0)|, (max - min) / max(1, |I(p_0)|))`` along ``orbit``.

    For the phase-dependent kind the phase advances by ``orbit.stride`` per point.
    """
    if len(orbit) == 0:
        raise DomainError("empty orbit")
    if spec.kind is IntegralKind.I:
        k = len(spec.params)
        sign = -1 if orbit.spec.backward else 1
        phases = (spec.phase + sign * orbit.stride * np.arange(len(orbit))) % k
        values = np.empty(len(orbit))
        for ph in np.unique(phases):
            mask = phases == ph
            values[mask] = eval_integral(spec.at_phase(int(ph)), (orbit.x[mask], orbit.y[mask]))
    else:
        values = np.asarray(eval_integral(spec, (orbit.x, orbit.y)), dtype=float)
    v0 = values[0]
    deviation = float(np.max(np.abs(values - v0)))
    rel_range = float((values.max() - values.min()) / max(1.0, abs(v0)))
    return deviation, rel_range


def shift_identity_check(a, b, grid) -> float:
    """Max over ``grid`` of ``|V_{a,b}(G_a(p)) - V_{b,a}(p)|``."""
    pts = np.asarray(grid, dtype=float).reshape(-1, 2)
    if pts.size == 0:
        raise DomainError("empty grid")
    x, y = pts[:, 0], pts[:, 1]
    lhs = eval_integral(IntegralSpec.V(b, a), step_elem_G(a, (x, y)))
    rhs = eval_integral(IntegralSpec.V(a, b), (x, y))
    return float(np.max(np.abs(lhs - rhs)))
