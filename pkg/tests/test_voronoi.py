"""Voronoi summation for d(n): weights, Bessel recipes, both sides."""

import math

import numpy as np
import pytest

from expsum.arith import d_exact
from expsum.voronoi import (
    CutoffTooSmall,
    NonCoprime,
    NonPositiveArgument,
    SmoothWeight,
    _k0_asymptotic,
    _k0_series,
    _y0_hankel,
    _y0_series,
    bessel_k0,
    bessel_y0,
    voronoi_lhs,
    voronoi_residual,
    voronoi_rhs,
)


def test_smooth_weight_support_and_endpoints():
    h = SmoothWeight(50.0)
    assert h.support == (50.0, 100.0)
    assert h(50.0) == 0.0
    assert h(100.0) == 0.0
    assert h(49.0) == 0.0 and h(101.0) == 0.0
    assert h(75.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        SmoothWeight(0.0)


def test_smooth_weight_scalar_array_agree():
    h = SmoothWeight(10.0)
    xs = np.linspace(5.0, 25.0, 41)
    arr = h(xs)
    for x, v in zip(xs, arr):
        assert h(float(x)) == pytest.approx(v, abs=1e-15)
    assert 0.0 < h(12.0) < 1.0


def test_bessel_positive_domain_only():
    with pytest.raises(NonPositiveArgument):
        bessel_y0(0.0)
    with pytest.raises(NonPositiveArgument):
        bessel_k0(-1.0)


def test_bessel_series_recipes_match_library_small_x():
    for x in (0.05, 0.3, 1.0, 2.0, 4.0, 6.0):
        assert _y0_series(x) == pytest.approx(bessel_y0(x), abs=1e-10)
        assert _k0_series(x) == pytest.approx(bessel_k0(x), abs=1e-10)


def test_y0_hankel_matches_library_large_x():
    for x in (35.0, 50.0, 120.0, 400.0):
        assert _y0_hankel(x) == pytest.approx(bessel_y0(x), rel=1e-11, abs=1e-13)


def test_k0_asymptotic_accuracy_profile():
    # honest at x = 20 ...
    assert _k0_asymptotic(20.0) == pytest.approx(bessel_k0(20.0), rel=1e-10)
    # ... but the series is divergent: at x = 2 even its optimal 4-term
    # truncation only reaches ~1e-2 relative, and the fixed 13-term
    # evaluation is worse still.  A switch point that low is unusable.
    rel = abs(_k0_asymptotic(2.0) - bessel_k0(2.0)) / bessel_k0(2.0)
    assert rel > 1e-2


def test_voronoi_lhs_is_a_finite_divisor_sum():
    import cmath

    h = SmoothWeight(50.0)
    want = 0j
    for n in range(50, 101):
        want += d_exact(n) * h(float(n)) * cmath.exp(2j * math.pi * (n % 3) / 3)
    got = voronoi_lhs(1, 3, h)
    assert got == pytest.approx(want, abs=1e-12)


def test_voronoi_identity_small_cells():
    for a, q in ((1, 1), (2, 5)):
        rep = voronoi_residual(a, q, SmoothWeight(50.0))
        assert rep.relative_residual < 1e-6
        assert rep.passes
        assert rep.truncation_level > 0
        # main term is real
        assert abs(rep.rhs_main.imag) < 1e-12


def test_voronoi_rhs_explicit_level_agrees_with_auto():
    h = SmoothWeight(50.0)
    main_auto, dual_auto = voronoi_rhs(1, 4, h)
    rep = voronoi_residual(1, 4, h)
    main_exp, dual_exp = voronoi_rhs(1, 4, h, N_max=rep.truncation_level)
    assert main_auto == main_exp
    assert dual_exp == pytest.approx(dual_auto, rel=1e-9)


def test_voronoi_rejects_bad_arguments():
    h = SmoothWeight(50.0)
    with pytest.raises(NonCoprime):
        voronoi_residual(2, 4, h)
    with pytest.raises(CutoffTooSmall):
        voronoi_rhs(1, 5, h, N_max=32)


def test_conjugate_symmetry():
    # replacing a by q - a conjugates both sides of the identity
    h = SmoothWeight(50.0)
    r1 = voronoi_residual(2, 7, h)
    r2 = voronoi_residual(5, 7, h)
    assert r1.lhs == pytest.approx(r2.lhs.conjugate(), rel=1e-12)
    assert r1.rhs_dual == pytest.approx(r2.rhs_dual.conjugate(), rel=1e-9)
