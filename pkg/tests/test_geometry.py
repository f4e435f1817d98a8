import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluripot.geometry import (
    KClass,
    ProjPoint,
    chart_indices,
    chordal_distance,
    fs_potential,
    from_affine,
    indicators,
    n_charts,
    volume,
)

pos = st.fractions(min_value=Fraction(1, 9), max_value=9, max_denominator=9)
cplx = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)


def test_fs_potential_values():
    assert fs_potential(KClass.p1p1(1, 1), 0, [0, 0]) == 0
    assert math.isclose(fs_potential(KClass.pn(2), 0, [1, 1]), 0.5 * math.log(3))
    assert math.isclose(fs_potential(KClass.p1p1(1, 1), 0, [1, 0]), 0.5 * math.log(2))
    with pytest.raises(ValueError):
        fs_potential(KClass.pn(2), 0, [1, 2, 3])
    with pytest.raises(ValueError):
        fs_potential(KClass.pn(2), 0, [np.nan, 0])


def test_chordal_distance():
    p, q = ProjPoint.of("P1", 1, 0), ProjPoint.of("P1", 0, 1)
    assert chordal_distance(p, p) == 0
    assert math.isclose(chordal_distance(p, q), 1.0)
    with pytest.raises(ValueError):
        chordal_distance(p, ProjPoint.of("P2", 1, 0, 0))


@given(st.lists(cplx, min_size=6, max_size=6))
def test_chordal_symmetry_and_bounds(c):
    if abs(c[0]) + abs(c[1]) + abs(c[2]) < 1e-3 or abs(c[3]) + abs(c[4]) + abs(c[5]) < 1e-3:
        return
    p, q = ProjPoint.of("P2", *c[:3]), ProjPoint.of("P2", *c[3:])
    d = chordal_distance(p, q)
    assert math.isclose(d, chordal_distance(q, p), abs_tol=1e-12)
    assert -1e-12 <= d <= 1 + 1e-12


def test_volume():
    assert volume(KClass.p1p1(1, 1)) == 2
    assert volume(KClass.pn(2)) == 1
    assert volume(KClass.p1p1(2, 3)) == 12


def test_indicators_examples():
    assert indicators(KClass.pn(2), ProjPoint.of("P2", 1, 2, 3)) == (1, 1)
    assert indicators(KClass.p1p1(1, 1)) == (2, 1)
    assert indicators(KClass.p1p1(2, 3)) == (5, 2)
    with pytest.raises(ValueError):
        indicators(KClass.p1p1(1, 0))


@given(pos, pos)
def test_seshadri_volume_chain(a, b):
    cls = KClass.p1p1(a, b)
    nu, eps = indicators(cls)
    v = volume(cls)
    assert eps**2 <= v <= nu**2


def test_projpoint_validation_and_charts():
    with pytest.raises(ValueError):
        ProjPoint.of("P2", 0, 0, 0)
    with pytest.raises(ValueError):
        ProjPoint("P3", ((1, 0, 0, 0),))
    assert n_charts("P2") == 3 and n_charts("P1xP1") == 4
    p = ProjPoint.of("P2", 2, 4, 6)
    assert p == ProjPoint.of("P2", 1, 2, 3)
    assert [chart_indices("P2", c) for c in range(3)] == [(0,), (1,), (2,)]
    assert np.allclose(p.affine(0), [2, 3])


@given(st.lists(cplx, min_size=2, max_size=2), st.integers(0, 3))
def test_affine_roundtrip_p1p1(z, chart):
    p = from_affine("P1xP1", chart, z)
    assert np.allclose(p.affine(chart), z, atol=1e-9)
