from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quasinil.coeffs import CoefficientSpec, power_sum_tail
from quasinil.moments import (
    charfn_moments,
    compare_routes,
    distinct_monomial_enum,
    distinct_monomial_sum,
    mixed_moment_check,
    moment_AstarA,
    moment_dense_oracle,
    moment_reim,
    moment_X,
    moment_Y,
    rademacher_moment,
    x_tail_bound,
)

H = Fraction(1, 2)
geo = CoefficientSpec.geometric(H)
two = CoefficientSpec.explicit([H, Fraction(1, 4)])
rat = st.fractions(-2, 2, max_denominator=5).filter(lambda x: x != 0)
short_specs = st.lists(rat, min_size=1, max_size=4).map(CoefficientSpec.explicit)


def test_monomial_sum_examples():
    assert distinct_monomial_sum((1,), geo).value == Fraction(1, 3)
    assert distinct_monomial_sum((1, 1), geo).value == Fraction(2, 45)
    assert distinct_monomial_sum((2,), CoefficientSpec.explicit([1])).value == 1


def test_monomial_sum_truncation_bound():
    exact = distinct_monomial_sum((1, 1), geo).value
    t = distinct_monomial_sum((1, 1), geo, N=20)
    assert t.value == distinct_monomial_enum((1, 1), [Fraction(1, 4 ** i) for i in range(1, 21)])
    assert 0 <= exact - t.value <= t.tail_bound


@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(0, 1, max_denominator=9), min_size=1, max_size=8),
       st.sampled_from([(1,), (2,), (1, 1), (2, 1), (3, 1), (1, 1, 1), (2, 1, 1)]))
def test_monomial_sum_matches_enumeration(xs, shape):
    spec = CoefficientSpec.explicit(xs)
    sq = [x * x for x in xs]
    assert distinct_monomial_sum(shape, spec).value == distinct_monomial_enum(shape, sq)


def test_moment_x_examples():
    assert moment_X(geo, 2).value == Fraction(1, 3)
    assert moment_X(geo, 4).value == Fraction(1, 5)
    assert moment_X(CoefficientSpec.geometric(Fraction(1, 3)), 2).value == Fraction(1, 8)
    assert all(moment_X(geo, n).value == 0 for n in (1, 3, 5, 7))


def test_moment_y_and_reim_examples():
    assert moment_Y(geo, 2).value == Fraction(-1, 3)
    assert moment_Y(geo, 4).value == Fraction(1, 5)
    assert moment_Y(geo, 3).value == 0
    assert moment_reim(geo, 2).value == Fraction(1, 12)
    assert moment_reim(geo, 3, part="im").value == 0
    assert moment_reim(geo, 4, part="im").value == Fraction(1, 80)


def test_astara_examples():
    assert moment_AstarA(geo, 1).value == Fraction(1, 6)
    assert moment_AstarA(CoefficientSpec.explicit([1]), 2).value == H
    assert moment_dense_oracle("AstarA", CoefficientSpec.explicit([1]), 2, 1, exact=True).value == H
    assert moment_dense_oracle("AstarA", two, 1, 2, exact=True).value == Fraction(5, 32)


def test_astara_geometric_vs_dense():
    comb = moment_AstarA(geo, 2)
    dense = moment_dense_oracle("AstarA", geo, 2, 10)
    assert abs(float(comb.value) - dense.value) <= dense.tail_bound + 1e-12


def test_dense_oracle_examples():
    c1 = Fraction(3, 7)
    assert moment_dense_oracle("X", CoefficientSpec.explicit([c1]), 2, 1, exact=True).value == c1 ** 2
    r = moment_dense_oracle("X", geo, 2, 8, exact=True)
    assert Fraction(1, 3) - r.value == Fraction(1, 3) / 4 ** 8
    assert moment_dense_oracle("X", geo, 3, 4, exact=True).value == 0


def test_x_tail_bound_covers_gap():
    for n in (2, 4, 6, 8):
        for N in (2, 4, 6):
            gap = moment_X(geo, n).value - moment_X(geo, n, N).value
            assert 0 <= gap <= x_tail_bound(geo, n, N)
    assert x_tail_bound(geo, 2, 5) == power_sum_tail(geo, 1, 5)


def test_charfn_examples():
    res = charfn_moments(H, 8)
    assert res.moments[1] == 0
    assert abs(res.moments[2] - Fraction(1, 3)) <= res.bounds[2]
    assert abs(res.moments[4] - Fraction(1, 5)) <= res.bounds[4]
    assert float(res.bounds[8]) <= 1e-12


def test_charfn_exact_for_finite_spec():
    res = charfn_moments(two, 6)
    for k in (2, 4, 6):
        assert res.moments[k] == moment_X(two, k).value
        assert res.bounds[k] == 0


def test_rademacher_examples():
    assert rademacher_moment(CoefficientSpec.explicit([1]), 2).value == 1
    assert all(rademacher_moment(geo, n, N=8).value == 0 for n in (1, 3, 5))
    vals = [rademacher_moment(geo, 2, N=N).value for N in (2, 4, 8)]
    assert all(Fraction(1, 3) - v == Fraction(1, 3) / 4 ** N for v, N in zip(vals, (2, 4, 8)))
    # step functions approximate f(x) = x: (1/2) int x^{2p} dx = 1/(2p+1)
    for p in (1, 2, 3):
        r = rademacher_moment(geo, 2 * p, N=10)
        assert abs(float(r.value) - 1 / (2 * p + 1)) <= r.tail_bound


def test_mixed_examples():
    assert mixed_moment_check(geo, 1, 1, 3).joint == 0
    c = mixed_moment_check(two, 2, 2, 4)
    assert c.passed and c.joint != 0
    assert mixed_moment_check(two, 2, 1, 4).joint == 0


@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(1, 3)])
@pytest.mark.parametrize("order", [2, 4, 6, 8])
def test_route_agreement_geometric(alpha, order):
    spec = CoefficientSpec.geometric(alpha)
    comb = moment_X(spec, order).value
    cf = charfn_moments(alpha, order)
    assert abs(comb - cf.moments[order]) <= cf.bounds[order]
    d = moment_dense_oracle("X", spec, order, 10)
    assert abs(float(comb) - d.value) <= d.tail_bound + 1e-12


def test_compare_routes():
    cmp = compare_routes("X", geo, 4, 8)
    assert cmp.consistent
    assert {r.route for r in cmp.reports} >= {"combinatorial", "dense", "charfn", "rademacher"}


@settings(max_examples=12, deadline=None)
@given(short_specs, st.integers(1, 4))
def test_x_matches_dense_exactly(spec, p):
    assert moment_X(spec, 2 * p, 4).value == moment_dense_oracle("X", spec, 2 * p, 4, exact=True).value


@settings(max_examples=8, deadline=None)
@given(short_specs, st.integers(1, 3))
def test_y_sign_rule_by_dense(spec, p):
    x = moment_dense_oracle("X", spec, 2 * p, 4, exact=True).value
    y = moment_dense_oracle("Y", spec, 2 * p, 4, exact=True).value
    assert y == (-1) ** p * x == moment_Y(spec, 2 * p, 4).value


@settings(max_examples=10, deadline=None)
@given(short_specs, st.integers(1, 4))
def test_astara_matches_dense_exactly(spec, p):
    assert moment_AstarA(spec, p, 4).value == moment_dense_oracle("AstarA", spec, p, 4, exact=True).value


@settings(max_examples=6, deadline=None)
@given(st.lists(rat, min_size=1, max_size=3).map(CoefficientSpec.explicit))
def test_mixed_factorizes(spec):
    for n in range(0, 7):
        for m in range(0, 7 - n):
            assert mixed_moment_check(spec, n, m, 3).passed
