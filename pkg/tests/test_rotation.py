import cmath
import math

import numpy as np
import pytest

import gumira.rotation as rot
from gumira.dynamics import MapSpec
from gumira.errors import DomainError, EmptyLevel, WrongTopology
from gumira.geometry import Branch, fixed_points, points_on_level
from gumira.rotation import (Method, estimate_winding, flow_rotation, flow_timing, jacobian_fd, limit_rho,
                             spec_DG_origin, vector_field_X, winding_turns)


def grad_V(a, b, x, y):
    return 2 * a * x - y + 2 * x * y * y, 2 * b * y - x + 2 * x * x * y


def test_field_vanishes_at_equilibria():
    assert vector_field_X(1, 1, (0.0, 0.0)) == (0.0, 0.0)
    for p in fixed_points(0.01, 0.49).pair:
        assert np.allclose(vector_field_X(0.01, 0.49, p), 0.0, atol=1e-14)


def test_field_is_tangent_to_levels(rng):
    for x, y in rng.uniform(-3, 3, size=(100, 2)):
        a, b = rng.uniform(0.05, 3, size=2)
        fx, fy = vector_field_X(a, b, (x, y))
        gx, gy = grad_V(a, b, x, y)
        assert abs(fx * gx + fy * gy) <= 1e-12 * max(1.0, math.hypot(fx, fy) * math.hypot(gx, gy))


def test_limit_examples():
    assert limit_rho(1, 1, "zero+") == pytest.approx(1 / 3, abs=1e-15)
    assert limit_rho(0.1, 0.2, "zero+") == 0.0
    assert limit_rho(3.0, 0.7, "infinity") == 0.5
    assert limit_rho(0.25, 0.25, "P+-") == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(DomainError):
        limit_rho(1, 1, "P+-")


def test_winding_near_zero_level():
    est = estimate_winding(1, 1, 1e-5)
    assert abs(est.rho - 1 / 3) <= 1e-2
    assert est.method is Method.WINDING and not est.flagged
    assert est.uncertainty == pytest.approx(1e-5)


def test_winding_at_large_level():
    assert abs(estimate_winding(1, 1, 1e6).rho - 0.5) <= 1e-2


def test_winding_on_two_periodic_level():
    assert abs(estimate_winding(0.2, 0.2, -0.04, Branch.POSITIVE_OVAL).rho - 0.5) <= 1e-3


def test_winding_errors():
    with pytest.raises(WrongTopology):
        estimate_winding(0.01, 0.49, 0.0)
    with pytest.raises(EmptyLevel):
        estimate_winding(1, 1, -1.0)
    with pytest.raises(DomainError):
        estimate_winding(1, 1, 1.0, n_iterates=10)


def test_flow_matches_winding():
    timing, est = flow_rotation(1, 1, 1.0)
    w = estimate_winding(1, 1, 1.0)
    assert abs(est.rho - w.rho) <= 1e-4
    assert timing.return_residual <= 1e-8
    assert timing.max_level_drift <= 1e-8
    assert 0 < timing.tau < timing.T


@pytest.mark.parametrize("a,b,h,branch", [
    (0.01, 0.49, 1e-4, None),
    (0.01, 0.49, -0.1, Branch.NEGATIVE_OVAL),
    (1, 1, 1e4, None),
])
def test_flow_matches_winding_elsewhere(a, b, h, branch):
    _, est = flow_rotation(a, b, h, branch)
    w = estimate_winding(a, b, h, branch, 200_000)
    assert abs(est.rho - w.rho) <= 1e-4


def test_flow_timing_rejects_equilibrium():
    with pytest.raises(WrongTopology):
        flow_timing(1, 1, (0.0, 0.0))


def test_seed_independence():
    n = 20_000
    seeds = points_on_level(1.0, 1.0, 0.7, Branch.MAIN, 5)
    rhos = [estimate_winding(1, 1, 0.7, Branch.MAIN, n, seed=p).rho for p in seeds]
    assert max(rhos) - min(rhos) <= 2 / n


def test_ovals_share_rotation_number():
    n = 20_000
    pos = estimate_winding(0.01, 0.49, -0.1, Branch.POSITIVE_OVAL, n).rho
    neg = estimate_winding(0.01, 0.49, -0.1, Branch.NEGATIVE_OVAL, n).rho
    assert abs(pos - neg) <= 2 / n


def test_rho_at_most_half_when_elliptic():
    for a, b in [(1, 1), (0.5, 0.6), (2, 3)]:
        for h in (1e-3, 0.1, 10.0, 1e3):
            rho = estimate_winding(a, b, h, None, 20_000).rho
            assert 0 < rho <= 0.5 + 1e-4


def test_constant_cycle_large_level():
    # G_b o G_b at large h turns by nearly half a turn, i.e. a quarter per G_b step
    assert abs(estimate_winding(0.8, 0.8, 1e6).rho - 0.5) <= 1e-2


def test_near_fixed_points_matches_oriented_limit():
    for a, b in [(0.1, 0.9), (0.01, 0.49)]:
        h_min = -0.25 - a * b + math.sqrt(a * b)
        rho = estimate_winding(a, b, h_min * (1 - 1e-6), Branch.POSITIVE_OVAL).rho
        assert rho == pytest.approx(limit_rho(a, b, "P+-", oriented=True), abs=2e-3)


def test_star_shape_violation_falls_back(monkeypatch):
    # a reference center outside the oval breaks star-shapedness
    monkeypatch.setattr(rot, "center_of", lambda a, b, branch: (1.5, 0.0))
    est = estimate_winding(1, 1, 1.0, Branch.MAIN, 5000)
    assert est.flagged and est.method is Method.FLOW
    assert abs(est.rho - 0.4074958) <= 1e-5
    _, bad = winding_turns(1, 1, (0.0, 1.0), (1.5, 0.0), 5000)
    assert bad > 0


def test_spectrum_at_origin():
    lp, lm = spec_DG_origin(1, 1)
    assert lp == pytest.approx(complex(-0.5, math.sqrt(3) / 2), abs=1e-15)
    assert lm == lp.conjugate()
    for a, b in [(0.5, 0.6), (2, 3), (1, 0.3)]:
        lp, lm = spec_DG_origin(a, b)
        assert abs(lp) == pytest.approx(1, abs=1e-14) and abs(lm) == pytest.approx(1, abs=1e-14)
        assert cmath.phase(lp) / (2 * math.pi) == pytest.approx(limit_rho(a, b, "zero+"), abs=1e-14)
    lp, lm = spec_DG_origin(0.01, 0.49)
    assert lp.imag == 0 and lp.real > 1
    assert lp.real * lm.real == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("a,b", [(1, 1), (0.01, 0.49), (2, 3)])
def test_spectrum_matches_finite_differences(a, b):
    # third derivatives grow like 1/a^3, so a small step keeps truncation error down; rounding stays ~eps|J|
    J = jacobian_fd(MapSpec.composed_g(a, b), (0.0, 0.0), eps=1e-9)
    fd = sorted(np.linalg.eigvals(J), key=lambda z: (z.real, z.imag))
    cf = sorted(spec_DG_origin(a, b), key=lambda z: (z.real, z.imag))
    # relative to the spectral radius: the saddle's small eigenvalue inherits the error of the large one
    radius = max(1.0, max(abs(v) for v in cf))
    for u, v in zip(fd, cf):
        assert abs(u - v) <= 1e-8 * radius


def test_profile_marks_undefined_levels():
    prof = rot.rho_profile(0.01, 0.49, [-0.5, 0.0, 0.5], None, 2000)
    assert math.isnan(prof[0]) and math.isnan(prof[1]) and 0 < prof[2] < 0.5
