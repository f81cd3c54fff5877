from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quasinil.exact import (
    ComplexRational,
    abs2,
    conj,
    format_exact,
    make,
    modulus,
    parse_exact,
    sqrt_upper,
    to_exact,
)

rationals = st.fractions(min_value=-10, max_value=10, max_denominator=50)
scalars = st.builds(make, rationals, rationals)


def test_make_collapses_real():
    assert isinstance(make(Fraction(1, 2), 0), Fraction)
    assert isinstance(make(1, 2), ComplexRational)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("3", Fraction(3)),
        ("-1/2", Fraction(-1, 2)),
        ("0.25", Fraction(1, 4)),
        ("1/2+1/3i", make(Fraction(1, 2), Fraction(1, 3))),
        ("-2i", make(0, -2)),
        ("i", make(0, 1)),
        ("3i", make(0, 3)),
        ("1-i", make(1, -1)),
    ],
)
def test_parse(text, expected):
    assert parse_exact(text) == expected


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_exact("abc")


def test_floats_refused():
    with pytest.raises(TypeError):
        to_exact(0.5)


@given(scalars)
def test_format_roundtrip(x):
    assert parse_exact(format_exact(x)) == x


@given(scalars, scalars, scalars)
def test_field_axioms(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert x * y == y * x
    if y != 0:
        assert (x / y) * y == x


@given(scalars)
def test_abs2_is_x_times_conj(x):
    assert x * conj(x) == abs2(x)


@given(st.fractions(min_value=0, max_value=100, max_denominator=1000))
def test_sqrt_upper_bounds(q):
    r, exact = sqrt_upper(q)
    assert r >= 0 and r * r >= q
    if exact:
        assert r * r == q
    else:
        assert r * r - q < Fraction(1, 2 ** 80) * (1 + q)


def test_modulus_of_pythagorean_triple_is_exact():
    assert modulus(make(Fraction(3, 5), Fraction(4, 5))) == (Fraction(1), True)
