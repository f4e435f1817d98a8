import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluripot import potentials as pot
from pluripot.geometry import KClass, ProjPoint, chordal_distance, fs_potential
from pluripot.poly import SparsePoly

cplx = st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False)


def p2_vars():
    return [SparsePoly.var(i, 3, grading=(3,)) for i in range(3)]


def two_conic():
    z0, z1, z2 = p2_vars()
    return pot.make_rational_green([z1 * z1 - z0 * z0, z2 * z2 - z0 * z0])


def test_eval_linear_projection():
    _, z1, z2 = p2_vars()
    g = pot.make_rational_green([z1, z2])
    assert math.isclose(pot.eval_potential(g, ProjPoint.of("P2", 1, 1, 0)), -0.5 * math.log(2))
    assert pot.eval_potential(g, ProjPoint.of("P2", 1, 0, 0)) == -math.inf
    assert g.poles == (ProjPoint.of("P2", 1, 0, 0),)


def test_eval_identity_on_p1_is_zero():
    z0, z1 = [SparsePoly.var(i, 2, grading=(2,)) for i in range(2)]
    g = pot.LogNormPotential("P1", (z0, z1), Fraction(1), (Fraction(1),))
    assert pot.eval_potential(g, ProjPoint.of("P1", 0, 1)) == 0


def test_two_conic_poles_and_lelong():
    g = two_conic()
    assert len(g.poles) == 4
    for s1 in (1, -1):
        for s2 in (1, -1):
            p = ProjPoint.of("P2", 1, s1, s2)
            assert any(p == q for q in g.poles)
            assert pot.lelong_exact(g, p) == Fraction(1, 2)
            assert pot.eval_potential(g, p) == -math.inf
    assert pot.lelong_exact(g, ProjPoint.of("P2", 1, 2, 3)) == 0


def test_non_finite_indeterminacy_rejected():
    z0, z1, z2 = p2_vars()
    with pytest.raises(ValueError):
        pot.make_rational_green([z1 * z2, z1 * z0])


@pytest.mark.parametrize("n,k", [(2, 1), (3, 2), (5, 3)])
def test_cusp_lelong(n, k):
    g = pot.make_cusp_green(n, k)
    assert pot.lelong_exact(g, ProjPoint.of("P2", 1, 0, 0)) == Fraction(k, n)


def test_cusp_bad_parameters():
    with pytest.raises(ValueError):
        pot.make_cusp_green(2, 2)


def test_hyperplane_average():
    g = pot.make_hyperplane_avg(pot.coordinate_hyperplanes("P2"))
    for p in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        assert pot.lelong_exact(g, ProjPoint.of("P2", *p)) == Fraction(2, 3)
    assert pot.lelong_exact(g, ProjPoint.of("P2", 1, 2, 3)) == 0
    g1 = pot.make_hyperplane_avg(pot.coordinate_hyperplanes("P1"))
    assert pot.lelong_exact(g1, ProjPoint.of("P1", 1, 0)) == Fraction(1, 2)
    assert pot.lelong_exact(g1, ProjPoint.of("P1", 0, 1)) == Fraction(1, 2)


def test_rab():
    p = ProjPoint.of("P1xP1", (1, 0), (1, 0))
    assert pot.lelong_exact(pot.make_rab(1, 1, p), p) == 1
    r = pot.make_rab(2, 3, p)
    assert pot.lelong_exact(r, p) == 2
    assert pot.eval_potential(r, p) == -math.inf
    assert r.kclass == KClass.p1p1(2, 3)
    with pytest.raises(ValueError):
        pot.make_rab(0, 1)


def test_greenp1_family_lelong():
    t0, t1, t2 = p2_vars()
    p = ProjPoint.of("P1xP1", (1, 0), (1, 0))
    assert pot.lelong_exact(pot.make_greenp1_family(1, 1, 3, t0**4), p) == Fraction(2, 3)
    assert pot.lelong_exact(pot.make_greenp1_family(1, 1, 3, t0**3 * (t1 + 2 * t2)), p) == 1
    const = SparsePoly.constant(5, 3)
    assert pot.lelong_exact(pot.make_greenp1_family(1, 1, 1, const), p) == 1
    with pytest.raises(ValueError):
        pot.make_greenp1_family(1, 1, 3, t0**3)


def test_lelong_zero_off_zero_set():
    g = pot.make_cusp_green(3, 2)
    assert pot.lelong_exact(g, ProjPoint.of("P2", 1, 1, 1)) == 0


def test_json_roundtrip():
    for g in (two_conic(), pot.make_rab(2, 3), pot.make_cusp_green(3, 2)):
        h = pot.LogNormPotential.from_json(g.to_json())
        assert h.components == g.components and h.scale == g.scale and h.ref_weights == g.ref_weights
        assert [w for w, _ in h.log_terms] == [w for w, _ in g.log_terms]


@given(st.lists(cplx, min_size=2, max_size=2))
def test_local_equals_fs_plus_global(z):
    g = two_conic()
    Z = np.array([z])
    glob = g.eval_affine(0, Z)
    if not np.all(np.isfinite(glob)):
        return
    assert np.allclose(g.local(0, Z), fs_potential(KClass.pn(2), 0, Z) + glob, atol=1e-9)


@given(st.lists(cplx, min_size=3, max_size=3), st.integers(0, 2))
def test_chart_independence(c, chart):
    if abs(c[chart]) < 1e-2:
        return
    g = two_conic()
    p = ProjPoint.of("P2", *c)
    if min(chordal_distance(p, q) for q in g.poles) < 1e-3:
        return
    z = p.affine(chart)[None, :]
    v0 = g.eval_affine(chart, z)[0]
    v1 = g.eval_homogeneous([np.array([x]) for x in c])[0]
    if np.isfinite(v0):
        assert math.isclose(v0, v1, rel_tol=1e-9, abs_tol=1e-9)


def test_transfer_roundtrip_and_forward_image():
    t0, t1, t2 = p2_vars()
    u = pot.make_greenp1_family(1, 1, 3, t0**4)
    R = pot.make_greenp1_plane(1, 1, 3, t0**4)
    fwd = pot.phi_forward(u)
    assert fwd.components == R.components
    back = pot.phi_inverse(fwd, target_weights=u.ref_weights)
    assert back.components == u.components
    Z = np.random.default_rng(0).normal(size=(100, 2)) + 1j * np.random.default_rng(1).normal(size=(100, 2))
    assert np.max(np.abs(back.local(0, Z) - u.local(0, Z))) <= 1e-10
    assert np.max(np.abs(fwd.local(0, Z) - R.local(0, Z))) <= 1e-10
    assert pot.phi_inverse(R).components == u.components


def test_inverse_rejects_current_on_blown_down_line():
    t0, t1, t2 = p2_vars()
    charged = pot.LogNormPotential("P2", (t0 * t0, t1 * t2), Fraction(1, 2), (Fraction(1),))
    with pytest.raises(ValueError):
        pot.phi_inverse(charged)


def test_inhomogeneous_components_rejected():
    t0, t1, t2 = p2_vars()
    with pytest.raises(ValueError):
        pot.LogNormPotential("P2", (t0, t1 * t1), Fraction(1), (Fraction(1),))
