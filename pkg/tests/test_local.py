import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from gumira.errors import DomainError
from gumira.local import (birkhoff_sigma, char_poly, eigen_origin_F, fd_eigenvalues, jacobian_origin_F,
                          local_report, resonance_check, resultant_closed_form, resultant_sylvester)


def test_cube_roots_at_unit_product():
    lp, lm = eigen_origin_F(2, 0.5)
    assert lp == pytest.approx(complex(-0.5, math.sqrt(3) / 2), abs=1e-15)
    assert lp ** 3 == pytest.approx(1, abs=1e-14)


def test_boundary_double_root():
    lp, lm = eigen_origin_F(2, 2)
    assert lp == lm == 1


def test_unit_modulus():
    lp, _ = eigen_origin_F(1, 2)
    assert abs(lp) == pytest.approx(1, abs=1e-15)


def test_vieta(rng):
    for a, b in rng.uniform(0.05, 3, size=(50, 2)):
        lp, lm = eigen_origin_F(a, b)
        assert lp * lm == pytest.approx(1, abs=1e-13)
        assert (lp + lm).real == pytest.approx(a * b - 2, abs=1e-13)
        assert char_poly(a, b) == (1.0, 2.0 - a * b, 1.0)


def test_rotation_fraction_range():
    prev = None
    for ab in np.linspace(0.01, 3.99, 200):
        frac = cmath.phase(eigen_origin_F(ab, 1.0)[0]) / (2 * math.pi)
        assert 0 < frac < 0.5
        if prev is not None:
            assert abs(frac - prev) < 0.05
        prev = frac


@pytest.mark.parametrize("a,b", [(2, 0.5), (1, 1), (0.3, 2.2), (1.5, 1.9)])
def test_eigenvalues_match_finite_differences(a, b):
    cf = eigen_origin_F(a, b)
    fd = fd_eigenvalues(a, b)
    for u, v in zip(cf, fd):
        assert abs(u - v) <= 1e-8
    J = jacobian_origin_F(a, b)
    assert np.linalg.det(J) == pytest.approx(1, abs=1e-14)


def test_resonance_examples():
    assert resonance_check(2, 0.5) == {3}
    assert resonance_check(1, 0.5) == set()
    assert resonance_check(2, 2) == {1, 2, 3}


def test_resultants_match_sylvester(rng):
    for _ in range(50):
        a = Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 40)))
        b = Fraction(int(rng.integers(1, 40)), int(rng.integers(1, 40)))
        for k in (1, 2, 3):
            closed = resultant_closed_form(a, b, k)
            assert resultant_sylvester(a, b, k) == closed


def test_exact_resonance_agrees(rng):
    for a, b in [(2, 0.5), (1, 1), (0.5, 3), (4, 1)]:
        assert resonance_check(a, b, exact=True) == resonance_check(a, b)


def test_sigma_examples(rng):
    assert birkhoff_sigma(1, 1) == pytest.approx(math.sqrt(3) / 2, abs=1e-15)
    assert birkhoff_sigma(2, 0.5) == pytest.approx(5 * math.sqrt(3) / 4, abs=1e-14)
    for _ in range(100):
        a = rng.uniform(0.01, 4)
        b = rng.uniform(0.01, 4 / a) * (1 - 1e-9)
        assert birkhoff_sigma(a, b) > 0
    with pytest.raises(DomainError):
        birkhoff_sigma(2, 2)


def test_report_exposes_both_orders():
    rep = local_report(2, 0.5)
    assert rep.sigma == birkhoff_sigma(2, 0.5) and rep.sigma_swapped == birkhoff_sigma(0.5, 2)
    assert rep.sigma != rep.sigma_swapped
    assert rep.resonant_orders == {3}
    assert rep.rotation_fraction == pytest.approx(1 / 3)
    assert math.isnan(local_report(3, 3).sigma)
