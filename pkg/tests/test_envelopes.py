import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluripot import envelopes as env

gammas = st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20)


def test_radial_closed_form_constants():
    g = env.radial_partial_green(Fraction(1, 2))
    assert math.isclose(g.R, 1.0)
    assert math.isclose(g.C, 0.5 * math.log(2))
    assert np.all(g.psi_of_norm(np.array([1.0, 2.0, 50.0])) == 0)
    assert g.psi_of_norm(np.array([0.5]))[0] < 0


def test_gamma_one_limit():
    g = env.radial_partial_green(1)
    r = np.array([0.1, 1.0, 10.0])
    assert np.allclose(g.psi_of_norm(r), np.log(r / np.sqrt(1 + r * r)))
    with pytest.raises(ValueError):
        env.radial_partial_green(Fraction(3, 2))


def test_radial_envelope_matches_closed_form():
    obs = env.fs_obstacle()
    w = env.radial_envelope(obs, Fraction(1, 2))
    g = env.radial_partial_green(Fraction(1, 2))
    assert np.max(np.abs(w.w - g.V(w.x))) <= 1e-6
    assert w.is_valid()


@given(gammas)
def test_radial_envelope_properties(gamma):
    obs = env.fs_obstacle(1024)
    w = env.radial_envelope(obs, gamma)
    assert np.all(w.w <= obs.w + 1e-12)
    assert w.is_convex(1e-8)
    g = env.radial_partial_green(gamma)
    assert np.max(np.abs(w.w - g.V(w.x))) <= 1e-4


def test_radial_envelope_small_gamma_and_idempotence():
    obs = env.fs_obstacle()
    w = env.radial_envelope(obs, Fraction(1, 10**6))
    assert np.max(np.abs(w.w - obs.w)) < 1e-5
    line = env.RadialProfile(obs.x, 0.5 * obs.x + 1)
    assert np.allclose(env.radial_envelope(line, Fraction(1, 2)).w, line.w)


def test_radial_envelope_rejects_nonconvex():
    x = np.linspace(-1, 1, 11)
    with pytest.raises(ValueError):
        env.radial_envelope(env.RadialProfile(x, -x * x), Fraction(1, 2))


def test_legendre_fs_values():
    dual = env.legendre(env.fs_obstacle(), dual_points=101)
    i = int(np.argmin(np.abs(dual.s - 0.5)))
    assert abs(dual.values[i] + 0.5 * math.log(2)) <= 1e-4
    assert abs(dual.values[0]) <= 1e-8


def test_double_legendre():
    obs = env.fs_obstacle(2048)
    back = env.legendre_back(env.legendre(obs, 2048), obs.x)
    assert np.all(back <= obs.w + 1e-12)
    assert np.max(obs.w - back) <= 2 * obs.dx


def test_toric_envelope_unit_class():
    h = env.toric_fs_obstacle(1, 1)
    w = env.toric_envelope(h, 1)
    X, Y = np.meshgrid(h.x, h.y, indexing="ij")
    assert np.max(np.abs(w.w - env.unit_toric_closed_form(X, Y))) <= 2e-2
    assert w.is_convex(1e-6)
    assert w.gradients_in_polytope(1e-6)


def test_toric_envelope_limits_and_idempotence():
    h = env.toric_fs_obstacle(1, 1, points=65)
    w0 = env.toric_envelope(h, 0, dual_points=65)
    assert np.max(np.abs(w0.w - h.w)) <= 2e-2
    w = env.toric_envelope(h, Fraction(1, 2), dual_points=65)
    assert np.max(np.abs(env.toric_envelope(w, Fraction(1, 2), dual_points=65).w - w.w)) <= 1e-9
    assert np.all(w.w <= h.w + 1e-12)


def test_toric_envelope_rejections():
    h = env.toric_fs_obstacle(1, 1, points=33)
    with pytest.raises(ValueError):
        env.toric_envelope(h, 3)
    with pytest.raises(ValueError):
        env.toric_envelope(h, Fraction(3, 2))


def test_toric_masses():
    h = env.toric_fs_obstacle(1, 1)
    m = env.toric_ma_masses(env.toric_envelope(h, 1), h=h)
    assert abs(m.dirac_mass - 1) <= 0.05
    assert abs(m.boundary_mass - 1) <= 0.05
    assert abs(m.total - 2) <= 1e-9
    m = env.toric_ma_masses(env.toric_envelope(h, Fraction(1, 2)), h=h)
    assert abs(m.dirac_mass - 0.25) <= 0.05
    m = env.toric_ma_masses(env.toric_envelope(h, Fraction(1, 20)), h=h)
    assert m.dirac_mass < 0.02


def test_psi_unit_toric_vanishes_off_region():
    assert env.psi_unit_toric(2.0, 2.0) == 0
    assert env.psi_unit_toric(0.1, 0.1) < 0
