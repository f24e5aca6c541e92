"""Adherence of scalar sequences: gap clustering, behavior classes, persistence
and homoclinic decay."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import DIVERGENCE_BOUND, Direction, Family, MapSpec, OrbitSample, recurrence_sequence
from .errors import DegenerateSequence, DivergedOrbit, DomainError
from .geometry import IntervalSet, _pair_coordinates, _y_roots
from .invariants import IntegralSpec, eval_integral
from .periods import DETECT_MAX_Q, DETECT_TOL, detect_period

GAP_FACTOR = 50.0
MIN_CLUSTER = 20
N_TERMS = 100_000
G_PREFIX_RATIO = 10
G_MAX_TERMS = 10_000_000


class Behavior(enum.Enum):
    CONSTANT = "Constant"
    PERIODIC = "Periodic2q"
    HOMOCLINIC = "HomoclinicAccumulation"
    ONE_INTERVAL = "OneInterval"
    TWO_INTERVALS = "TwoIntervals"
    MANY_INTERVALS = "ManyIntervals"
    ORBIT_PLUS_POINTS = "OrbitPlusAccumulationPoints"
    DIVERGED = "Diverged"


@dataclass(frozen=True)
class AdherenceReport:
    intervals: IntervalSet
    n_points: int
    behavior: Behavior
    q: Optional[int] = None
    diverged_at: Optional[int] = None

    @property
    def count(self) -> int:
        return self.intervals.count


def _gaps(v, gap_factor):
    """Indices ``i`` of the sorted array ``v`` with ``v[i+1] - v[i]`` above the split threshold."""
    span = v[-1] - v[0]
    return np.flatnonzero(np.diff(v) > gap_factor * span / v.size)


def adherence_intervals(sequence, gap_factor=GAP_FACTOR, min_cluster=MIN_CLUSTER,
                        prefix_ratio=None) -> IntervalSet:
    """Closed hulls of the clusters of ``sequence`` after splitting sorted values at large gaps.

    A gap splits when it exceeds ``gap_factor`` times the mean spacing
    ``range / len``; clusters with fewer than ``min_cluster`` values are dropped.
    With ``prefix_ratio = r`` a gap only splits if the first ``len / r`` terms
    also split across it, which discards the transient large gaps a
    near-resonant rotation leaves at particular sample sizes.
    """
    seq = np.asarray(sequence, dtype=float)
    v = np.sort(seq)
    if v.size < 2:
        raise DomainError("need at least two values")
    if v[-1] - v[0] < 1e-12:
        raise DegenerateSequence(f"sequence is constant ({v[0]!r})")
    idx = _gaps(v, gap_factor)
    if prefix_ratio is not None and idx.size:
        w = np.sort(seq[: max(2, seq.size // prefix_ratio)])
        pidx = _gaps(w, gap_factor) if w[-1] > w[0] else np.empty(0, dtype=int)
        # a full-sample gap survives if one prefix gap spans it
        j = np.searchsorted(w, v[idx], side="right") - 1
        ok = np.isin(j, pidx) & (w[np.minimum(j + 1, w.size - 1)] >= v[idx + 1])
        idx = idx[ok]
    cut = idx + 1
    bounds = np.concatenate(([0], cut, [v.size]))
    ivs = [(v[i], v[j - 1]) for i, j in zip(bounds[:-1], bounds[1:]) if j - i >= min_cluster]
    return IntervalSet(tuple(ivs))


def behavior_for_count(k: int) -> Behavior:
    if k == 1:
        return Behavior.ONE_INTERVAL
    if k == 2:
        return Behavior.TWO_INTERVALS
    return Behavior.MANY_INTERVALS


def _spec(family, a, b, direction=Direction.FORWARD):
    ctor = MapSpec.composed_g if family is Family.G else MapSpec.composed_f
    return ctor(a, b, direction)


def homoclinic_seed(a, b, upper=True):
    """A point of ``{V_{b,a} = 0}`` other than the origin (``ab < 1/4``), above ``P_+``."""
    if not a * b < 0.25:
        raise DomainError("the zero level is a homoclinic figure only for ab < 1/4")
    x = _pair_coordinates(a, b)[0]
    y_up, y_down = _y_roots(a, b, 0.0, x)
    return (x, y_up if upper else y_down)


def _project_zero_level(a, b, u, v, r2):
    """Newton steps onto ``{V_{b,a} = 0}`` for the point ``s (u, v)`` with ``s^2 = r2``.

    Works on ``V / s^2 = a u^2 + b v^2 - u v + r2 u^2 v^2`` so that nothing
    underflows when the point is tiny.
    """
    for _ in range(3):
        f = a * u * u + b * v * v - u * v + r2 * u * u * v * v
        gu = 2 * a * u - v + 2 * r2 * u * v * v
        gv = 2 * b * v - u + 2 * r2 * u * u * v
        g2 = gu * gu + gv * gv
        if g2 == 0.0:
            break
        u -= f * gu / g2
        v -= f * gv / g2
    return u, v


def homoclinic_orbit(a, b, p0, n_steps, direction=Direction.FORWARD):
    """Orbit of ``G_{b,a}`` constrained to the zero level by projecting after every step.

    Plain double-precision iteration leaves the saddle along its unstable
    direction after a handful of steps; the projection removes that component.
    The state is kept as ``2^e (u, v)`` with ``|(u, v)|`` near one, so the
    direction stays accurate after the point itself underflows.
    """
    spec = MapSpec.composed_g(a, b, direction)
    betas = tuple(reversed(spec.params)) if spec.backward else spec.params
    xs = np.empty(n_steps + 1)
    ys = np.empty(n_steps + 1)
    u, v, e = float(p0[0]), float(p0[1]), 0
    for i in range(n_steps + 1):
        if u == 0.0 and v == 0.0:
            xs[i:], ys[i:] = 0.0, 0.0
            break
        _, k = math.frexp(max(abs(u), abs(v)))
        u, v, e = math.ldexp(u, -k), math.ldexp(v, -k), e + k
        scale2 = math.ldexp(1.0, 2 * e)
        if i > 0:
            for beta in betas:
                # G_beta and its inverse in scaled coordinates
                if spec.backward:
                    u, v = -v + u / (beta + scale2 * u * u), u
                else:
                    u, v = v, -u + v / (beta + scale2 * v * v)
        u, v = _project_zero_level(a, b, u, v, scale2)
        xs[i], ys[i] = math.ldexp(u, e), math.ldexp(v, e)
    return OrbitSample(spec, xs, ys)


@dataclass(frozen=True)
class HomoclinicDecay:
    forward_N: Optional[int]
    backward_N: Optional[int]
    threshold: float
    n_steps: int

    @property
    def decays(self) -> bool:
        return self.forward_N is not None and self.backward_N is not None


def _entry_index(values, threshold):
    """First ``N`` with ``|values[n]| < threshold`` for all ``n >= N``."""
    above = np.flatnonzero(np.abs(values) >= threshold)
    n = 0 if above.size == 0 else int(above[-1]) + 1
    return n if n < values.size else None


def homoclinic_decay(a, b, p0=None, n_steps=2000, threshold=1e-2) -> HomoclinicDecay:
    """Last entry of the sequence into ``|x_n| < threshold`` in each time direction along the zero level."""
    p0 = homoclinic_seed(a, b) if p0 is None else p0
    fwd = homoclinic_orbit(a, b, p0, n_steps, Direction.FORWARD)
    bwd = homoclinic_orbit(a, b, p0, n_steps, Direction.BACKWARD)
    seq_f = np.column_stack((fwd.x, fwd.y)).ravel()
    seq_b = np.column_stack((bwd.y, bwd.x)).ravel()
    return HomoclinicDecay(_entry_index(seq_f, threshold), _entry_index(seq_b, threshold),
                           threshold, n_steps)


def persistence_check(orbit: OrbitSample):
    """``(bounded, sup |x|)``; bounded means every point is finite and inside the divergence guard."""
    x = np.asarray(orbit.x)
    y = np.asarray(orbit.y)
    finite = bool(np.all(np.isfinite(x)) and np.all(np.isfinite(y)))
    sup = float(np.max(np.abs(x))) if x.size else 0.0
    bounded = finite and sup <= DIVERGENCE_BOUND and float(np.max(np.abs(y), initial=0.0)) <= DIVERGENCE_BOUND
    return bounded, sup


def fill_ratio(x, y, bins=100) -> float:
    """Share of occupied cells on a ``bins x bins`` grid over the bounding box (a 2-D area heuristic)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    counts, _, _ = np.histogram2d(x, y, bins=bins)
    return float(np.count_nonzero(counts)) / counts.size


def _accumulation_points(seq, intervals, gap_factor, min_cluster):
    """Heuristic for an orbit plus finitely many accumulation points: every cluster is tiny."""
    span = float(np.ptp(seq))
    widths = [hi - lo for lo, hi in intervals]
    return bool(widths) and max(widths) < 1e-3 * span


def classify_behavior(family, a, b, x1, x2, n_terms=N_TERMS, gap_factor=GAP_FACTOR,
                      min_cluster=MIN_CLUSTER, period_tol=DETECT_TOL, max_q=DETECT_MAX_Q,
                      zero_tol=1e-12, split_parity=False, max_terms=G_MAX_TERMS) -> AdherenceReport:
    """Behavior class of the sequence with initial terms ``x1, x2``.

    Stages: divergence guard, periodicity, decay to the saddle along the zero
    level (G family, ``ab < 1/4``), then gap clustering of the terms.
    G-family orbits near a resonance fill their curve slowly; while more than
    two clusters remain the sequence is extended tenfold, up to ``max_terms``.
    """
    family = Family(family)
    if n_terms < 10_000:
        raise DomainError("n_terms must be >= 10^4")
    try:
        seq = recurrence_sequence(family, a, b, x1, x2, n_terms)
    except DivergedOrbit as exc:
        return AdherenceReport(IntervalSet(), 0, Behavior.DIVERGED, diverged_at=exc.last_step)
    pts = seq[: 2 * ((max_q + 1))].reshape(-1, 2)
    orbit = OrbitSample(_spec(family, a, b), pts[:, 0].copy(), pts[:, 1].copy())
    rep = detect_period(orbit, period_tol, max_q)
    if rep.found:
        if rep.map_period == 1 and abs(x1 - x2) <= period_tol:
            iv = IntervalSet(((x1, x1),))
            return AdherenceReport(iv, n_terms, Behavior.CONSTANT, 1)
        vals = np.unique(np.round(seq[: 2 * rep.map_period], 12))
        iv = IntervalSet(tuple((v, v) for v in vals))
        return AdherenceReport(iv, n_terms, Behavior.PERIODIC, rep.map_period)
    if family is Family.G and a * b < 0.25:
        h0 = float(eval_integral(IntegralSpec.V(a, b), (x1, x2)))
        if abs(h0) <= zero_tol:
            decay = homoclinic_decay(a, b, (x1, x2))
            if decay.decays:
                return AdherenceReport(IntervalSet(((0.0, 0.0),)), n_terms, Behavior.HOMOCLINIC)
    # G-family orbits are rotations on invariant curves; see adherence_intervals
    ratio = G_PREFIX_RATIO if family is Family.G else None
    while True:
        parts = (seq[0::2], seq[1::2]) if split_parity else (seq,)
        ivs = IntervalSet.union(*(adherence_intervals(p, gap_factor, min_cluster, ratio) for p in parts))
        if family is not Family.G or ivs.count <= 2 or seq.size >= max_terms:
            break
        seq = recurrence_sequence(family, a, b, x1, x2, min(10 * seq.size, max_terms))
    if family is Family.F and _accumulation_points(seq, ivs, gap_factor, min_cluster):
        return AdherenceReport(ivs, seq.size, Behavior.ORBIT_PLUS_POINTS)
    return AdherenceReport(ivs, seq.size, behavior_for_count(ivs.count))


def count_sensitivity(family, a, b, x1, x2, n_terms=N_TERMS, gap_factors=(20, 50, 100),
                      min_cluster=MIN_CLUSTER) -> dict:
    """Interval counts of one sequence under several gap factors."""
    seq = recurrence_sequence(Family(family), a, b, x1, x2, n_terms)
    return {g: adherence_intervals(seq, g, min_cluster).count for g in gap_factors}
