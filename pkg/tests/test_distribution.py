"""d_3 in arithmetic progressions: exact identities and re-bracketing."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsum.arith import d3_exact
from expsum.distribution import (
    ApDiscrepancy,
    coprime_mean,
    d3_ap_sum,
    d3_to_bilinear,
    discrepancy_scan,
    ramanujan_decomposition,
)


def test_d3_ap_sum_matches_exact_formula():
    X, q = 2000, 7
    for a in range(1, q + 1):
        direct = sum(d3_exact(n) for n in range(a, X + 1, q))
        assert d3_ap_sum(X, q, a) == direct


def test_d3_ap_sum_validation():
    with pytest.raises(ValueError):
        d3_ap_sum(100, 5, 0)
    with pytest.raises(ValueError):
        d3_ap_sum(100, 5, 6)
    assert d3_ap_sum(0, 5, 1) == 0


def test_coprime_mean_is_exact_rational():
    X, q = 100, 6
    total = sum(d3_exact(n) for n in range(1, X + 1) if math.gcd(n, q) == 1)
    mean = coprime_mean(X, q)
    assert mean == Fraction(total, 2)  # phi(6) = 2
    assert isinstance(mean, Fraction)


def test_progressions_partition_the_coprime_mass():
    X, q = 500, 12
    mean = coprime_mean(X, q)
    units = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]
    total = sum(d3_ap_sum(X, q, a) for a in units)
    assert Fraction(total, len(units)) == mean


@settings(deadline=None, max_examples=25)
@given(st.integers(10, 3000), st.integers(1, 40))
def test_zero_sum_identity_exact(X, q):
    mean = coprime_mean(X, q)
    acc = Fraction(0)
    for a in range(1, q + 1):
        if math.gcd(a, q) != 1:
            continue
        acc += ApDiscrepancy(X, q, a, d3_ap_sum(X, q, a), mean).delta_exact
    assert acc == 0


def test_ramanujan_decomposition_telescopes():
    X = 10**4
    for q in (7, 9, 12, 30):
        for a in (1, q - 1):
            if math.gcd(a, q) != 1:
                continue
            dec = ramanujan_decomposition(X, q, a)
            assert dec.defect() <= 1e-6
            assert [d for d, _ in dec.terms] == sorted(d for d, _ in dec.terms)
    with pytest.raises(ValueError):
        ramanujan_decomposition(100, 9, 3)


def test_principal_term_dominates():
    # the d = 1 term carries the X-scale main mass; every higher
    # conductor contributes only a (much smaller) discrepancy term
    X, q, a = 10**4, 7, 3
    dec = ramanujan_decomposition(X, q, a)
    d1 = dec.terms[0][1]
    assert dec.terms[0][0] == 1
    assert all(abs(d1) > 5 * abs(s) for _, s in dec.terms[1:])


def test_discrepancy_scan_rows_and_aggregates():
    rows = discrepancy_scan(2000, [3, 4, 9], check_ramanujan=True)
    per_a = [r for r in rows if r["a"] != "*"]
    agg = [r for r in rows if r["a"] == "*"]
    assert len(agg) == 3
    assert len(per_a) == 2 + 2 + 6
    for r in agg:
        assert r["max_abs_delta"] >= 0.0
        assert math.isfinite(r["slope_fit"]) or math.isnan(r["slope_fit"])
    for r in per_a:
        assert math.isnan(r["max_abs_delta"])


def test_d3_to_bilinear_rebracketing_is_exact():
    for y, q, b in ((10, 7, 1), (50, 12, 5), (200, 9, 2), (37, 30, 7)):
        direct, glued = d3_to_bilinear(y, q, b)
        assert abs(direct - glued) <= 1e-9 * max(1.0, abs(direct))
    with pytest.raises(ValueError):
        d3_to_bilinear(0, 7)
    with pytest.raises(ValueError):
        d3_to_bilinear(10**6 + 1, 7)
