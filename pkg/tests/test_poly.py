from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluripot.poly import GaussQ, SparsePoly, format_rational, parse_poly, parse_rational

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
gauss = st.builds(GaussQ, fracs, fracs)


def x(i, n=3):
    return SparsePoly.var(i, n)


def test_gaussq_arithmetic():
    i = GaussQ(0, 1)
    assert i * i == -1
    assert (1 + i) * (1 - i) == 2
    assert GaussQ(1, 1) / GaussQ(1, -1) == i
    assert GaussQ(Fraction(3, 4)).norm2() == Fraction(9, 16)
    with pytest.raises(ZeroDivisionError):
        GaussQ(1) / GaussQ(0)


@given(gauss, gauss, gauss)
def test_gaussq_field_laws(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert a * b == b * a
    if b:
        assert (a / b) * b == a


def test_poly_ring_ops():
    p = (x(0) + x(1)) ** 2
    assert p == x(0) ** 2 + 2 * x(0) * x(1) + x(1) ** 2
    assert (p - p).is_zero()
    assert p.total_degree() == 2


def test_graded_degree_and_inhomogeneous_rejected():
    p = SparsePoly(3, {(2, 0, 0): 1, (0, 1, 1): -1}, grading=(3,))
    assert p.degree == (2,)
    with pytest.raises(ValueError):
        SparsePoly(3, {(2, 0, 0): 1, (0, 1, 0): 1}, grading=(3,))
    q = SparsePoly(4, {(1, 0, 2, 0): 1, (0, 1, 0, 2): 3}, grading=(2, 2))
    assert q.degree == (1, 2)


def test_compose_and_substitute():
    # (x^2 + y) o (x + 1, x*y) = x^2 + 2x + 1 + x*y
    p = x(0, 2) ** 2 + x(1, 2)
    q = p.compose([x(0, 2) + 1, x(0, 2) * x(1, 2)])
    assert q == x(0, 2) ** 2 + 2 * x(0, 2) + 1 + x(0, 2) * x(1, 2)
    assert p.substitute({0: 3}) == x(1, 2) + 9


def test_min_degree_and_monomial_content():
    p = x(0) ** 2 * x(1) + x(0) ** 3 * x(2) ** 2
    assert p.min_degree() == 3
    assert p.monomial_content() == (2, 0, 0)
    assert p.divide_monomial((2, 0, 0)) == x(1) + x(0) * x(2) ** 2
    with pytest.raises(ValueError):
        p.divide_monomial((0, 1, 0))


@given(st.lists(st.tuples(st.tuples(*[st.integers(0, 3)] * 3), gauss), max_size=5), st.lists(gauss, min_size=3, max_size=3))
def test_eval_exact_matches_float(terms, pt):
    p = SparsePoly(3, terms)
    exact = complex(p.eval_exact(pt)) if p.terms else 0j
    approx = complex(p.eval([complex(v) for v in pt]))
    assert abs(exact - approx) <= 1e-9 * (1 + abs(exact))


@given(st.lists(st.tuples(st.tuples(*[st.integers(0, 2)] * 2), gauss), max_size=4), fracs)
def test_translate_roundtrip(terms, s):
    p = SparsePoly(2, terms)
    assert p.translate([s, -s]).translate([-s, s]) == p


def test_json_roundtrip():
    p = SparsePoly(3, {(1, 1, 0): GaussQ(Fraction(1, 3), -2), (0, 0, 2): 5}, grading=(3,))
    assert SparsePoly.from_json(3, p.to_json(), grading=(3,)) == p


def test_parse_poly():
    p = parse_poly("z1^2 - z0^2 + I/2*z0*z2", ["z0", "z1", "z2"], grading=(3,))
    assert p.terms[(0, 2, 0)] == 1
    assert p.terms[(2, 0, 0)] == -1
    assert p.terms[(1, 0, 1)] == GaussQ(0, Fraction(1, 2))
    with pytest.raises(ValueError):
        parse_poly("sqrt(2)*z0", ["z0"])
    with pytest.raises(ValueError):
        parse_poly("z0^(", ["z0"])


def test_rational_strings():
    assert parse_rational("3/6") == Fraction(1, 2)
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(-1, 3)) == "-1/3"
    assert np.isclose(float(parse_rational("0.25")), 0.25)
