from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from quasinil.coeffs import CoefficientSpec, coeff
from quasinil.subspace import (
    PQWord,
    hyperinvariance_report,
    lower_bound_check,
    ratio_profile,
    rm_trace,
    rm_trace_direct,
)
from quasinil.tensor import OperatorSum, word_op

H = Fraction(1, 2)
geo = CoefficientSpec.geometric(H)
WORDS = ["".join(w) for L in range(0, 4) for w in product("PQ", repeat=L)]


def test_word_parsing():
    assert PQWord.parse("pqp").p_count == 2
    assert len(PQWord.parse("1")) == 0
    with pytest.raises(ValueError):
        PQWord.parse("PV")


def test_rm_trace_examples():
    assert rm_trace("", H, 1) == Fraction(1, 6)
    assert rm_trace("Q", H, 1) == Fraction(7, 48)
    assert rm_trace("", H, 0) == 1
    assert rm_trace("PQ", H, 0) == Fraction(1, 4)
    for m in range(1, 6):
        assert rm_trace("P", H, m) == H * H ** (2 * m) * rm_trace("", H, m)


def test_rm_trace_rejects_non_geometric():
    with pytest.raises(ValueError):
        rm_trace("P", CoefficientSpec.explicit([H]), 1)
    with pytest.raises(ValueError):
        rm_trace("P", Fraction(3, 2), 1)


@pytest.mark.parametrize("word", WORDS)
def test_rm_trace_matches_direct_sum(word):
    for m in range(1, 9):
        exact = rm_trace(word, H, m)
        direct = rm_trace_direct(word, H, m, N=60)
        assert 0 <= exact - direct.value <= direct.tail_bound


@settings(max_examples=30, deadline=None)
@given(st.text("PQ", max_size=6), st.integers(0, 8),
       st.sampled_from([Fraction(1, 2), Fraction(1, 3), Fraction(2, 3)]))
def test_prepending_p_scales_exactly(word, m, a):
    assert rm_trace("P" + word, a, m) == a ** (2 * m) / 2 * rm_trace(word, a, m)


def test_ratio_profile_examples():
    p = ratio_profile("P", H, 20)
    for row in p.rows:
        assert row.ratio == H ** (2 * row.m) / 2
        assert math.isclose(row.root, 0.5 * 2 ** (-1 / (2 * row.m)), rel_tol=1e-14)
    assert abs(p.root_at(20) - 0.49141) < 1e-5
    assert all(r.root == 1.0 for r in ratio_profile("", H, 10).rows)
    q = ratio_profile("Q", H, 60)
    assert abs(q.root_at(60) - 1) <= 0.05
    assert all(0 <= r.ratio <= 1 for r in q.rows)


@pytest.mark.parametrize("word", WORDS)
def test_ratio_roots_near_limit(word):
    prof = ratio_profile(word, H, 60)
    assert abs(prof.root_at(60) - float(prof.limit)) <= 0.06


def test_lower_bound_examples():
    one = lower_bound_check(OperatorSum.identity(), H, 6, 6)
    assert one.passed and all(r.ratio_sq == 1 for r in one.rows)
    p = lower_bound_check(word_op("P"), H, 8, 6)
    assert p.passed
    # normalized by ||P||_2, the root is alpha itself; unnormalized it is alpha 2^(-1/(2m))
    for row in p.rows:
        assert row.ratio_sq == H ** (2 * row.m)
        assert math.isclose(row.root * 2 ** (-1 / (2 * row.m)), ratio_profile("P", H, 8).root_at(row.m))
    xi = word_op("QP", Fraction(2, 3)) + word_op("P", Fraction(-1, 5)) + OperatorSum.identity(Fraction(1, 7))
    rep = lower_bound_check(xi, H, 10, 8)
    assert rep.passed and rep.min_margin > 0
    assert any(r.truncated_passed is None for r in rep.rows)


def test_lower_bound_truncated_close_to_exact():
    # QP has ratio above 1 at m = 1: tau(QP A*A) / (tau(A*A) tau(QP)) = 25/16
    rep = lower_bound_check(word_op("QP"), H, 3, 8)
    assert rep.rows[0].ratio_sq == Fraction(25, 16)
    for row in rep.rows:
        assert abs(row.truncated_root - row.root) < 1e-3


def test_hyperinvariance_examples():
    r = hyperinvariance_report("P", geo, 3)
    assert r.found and r.pair == (1, 2)
    assert r.witness.coefficient_of(word_op(["V*", "V"])) == -(coeff(geo, 2) / coeff(geo, 1))
    assert hyperinvariance_report("Q", geo, 3).found
    pq = hyperinvariance_report("PQ", geo, 4)
    assert pq.found and pq.pair == (2, 3)


@pytest.mark.parametrize("word", [w for w in WORDS if w])
def test_hyperinvariance_all_short_words(word):
    r = hyperinvariance_report(word, geo, 5)
    assert r.found
    assert r.rank_join > r.rank_p
