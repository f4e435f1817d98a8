import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluripot import ma_grid as mg
from pluripot import potentials as pot
from pluripot.acceptance import two_conic_green
from pluripot.geometry import KClass, ProjPoint, fs_potential

P2 = KClass.pn(2)
cplx = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def fs(Z):
    return fs_potential(P2, 0, Z)


def test_fs_density_at_origin():
    assert abs(mg.density_at(fs, [0, 0], h=1e-2) - 2 / math.pi**2) <= 1e-3


@given(cplx, cplx)
def test_fs_density_closed_form(a, b):
    # (dd^c rho)^2 = (2/pi^2) (1 + |z|^2)^-3 dV
    r2 = abs(a) ** 2 + abs(b) ** 2
    assert math.isclose(mg.density_at(fs, [a, b], h=1e-2), 2 / math.pi**2 / (1 + r2) ** 3, rel_tol=1e-4, abs_tol=1e-6)


def test_pluriharmonic_density_vanishes():
    h = 0.1
    grid = mg.ChartGrid("P2", 0, 0.5, h, lambda Z: np.real(Z[..., 0] ** 3 + 2j * Z[..., 0] * Z[..., 1]))
    assert np.max(np.abs(mg.ma_density(grid))) <= h**2


def test_density_is_positive_for_psh_sum():
    u = lambda Z: fs(Z) + 0.3 * np.log1p(np.abs(Z[..., 0]) ** 4)
    assert mg.density_at(u, [0.4, -0.2j]) > 0


def test_partition_of_unity():
    rng = np.random.default_rng(3)
    Z = rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2))
    for space in ("P2", "P1xP1"):
        p = [ProjPoint.of(space, *([1, z[0], z[1]] if space == "P2" else [(1, z[0]), (1, z[1])])) for z in Z]
        total = 0.0
        for c in range(3 if space == "P2" else 4):
            Zc = np.array([q.affine(c) if _in_chart(q, c) else [0, 0] for q in p])
            wc = mg.partition_weight(space, c, Zc)
            total = total + np.where([_in_chart(q, c) for q in p], wc, 0.0)
        assert np.allclose(total, 1.0)


def _in_chart(p, c):
    try:
        p.affine(c)
        return True
    except ValueError:
        return False


def test_fs_total_mass_fast():
    rep = mg.ma_report(pot.ZeroPotential(P2), [], h=0.1)
    assert abs(rep.smooth_integral - 1) <= 1e-3
    assert rep.pole_masses == []


def test_p1p1_total_mass():
    rep = mg.ma_report(pot.ZeroPotential(KClass.p1p1(1, 2)), [], h=0.1)
    assert abs(rep.smooth_integral - 4) <= 4e-3


def test_ball_flux_of_log_norm():
    # log|z| has Monge-Ampère mass 1 at the origin
    u = lambda Z: np.log(np.linalg.norm(Z, axis=-1))
    assert abs(mg.ball_flux(u, [0, 0], 0.3) - 1) <= 1e-3


def test_conic_green_fast():
    g = two_conic_green()
    chk = mg.check_green(g, g.poles, [Fraction(1, 4)] * 4, h=0.1)
    assert chk.passed, chk.failures
    assert all(abs(m - 0.25) <= 0.02 for m in chk.report.pole_masses)
    bad = mg.check_green(g, g.poles, [Fraction(1, 2)] + [Fraction(1, 6)] * 3, report=chk.report)
    assert not bad.passed
    assert any(f.startswith("pole 1") for f in bad.failures)


def test_conic_density_small_off_poles():
    g = two_conic_green()
    u = lambda Z: pot.local_potential(g, P2, 0, Z)
    for z in ([0.2, -0.3], [0.1j, 0.5], [-0.4, 0.3j]):
        assert abs(mg.density_at(u, z, h=0.05)) <= 5 * 0.05


@pytest.mark.parametrize("n,k", [(2, 1), (3, 2)])
def test_cusp_green_passes(n, k):
    g = pot.make_cusp_green(n, k)
    chk = mg.check_green(g, g.poles, [1], ball_radius=1.2, h=0.1)
    assert chk.passed, chk.failures


def test_validation():
    g = two_conic_green()
    with pytest.raises(ValueError):
        mg.check_green(g, g.poles, [Fraction(1, 2)] * 4)
    with pytest.raises(ValueError):
        mg.check_green(g, g.poles, [1])
    with pytest.raises(ValueError):
        mg.ChartGrid("P2", 0, 1.0, 0.3, fs)
    with pytest.raises(ValueError):
        mg.ma_report(g, g.poles, ball_radius=0.9)


@pytest.mark.parametrize("z", [(0.7 + 0.2j, -0.4), (-1.1, 0.5j)])
def test_chart_independence(z):
    # densities are measures: they transform by |det J|^2, here |z1|^-6 from chart 0 to chart 1
    g = two_conic_green()
    p = ProjPoint.of("P2", 1, *z)
    w = p.affine(1)
    d0 = mg.density_at(lambda Z: pot.local_potential(g, P2, 0, Z), p.affine(0), h=0.02)
    d1 = mg.density_at(lambda Z: pot.local_potential(g, P2, 1, Z), w, h=0.02)
    assert abs(d0 - d1 * abs(z[0]) ** -6) <= 5 * 0.02


def test_mass_conservation_and_positivity():
    g = two_conic_green()
    h = 0.1
    rep = mg.ma_report(g, g.poles, h=h)
    assert abs(rep.smooth_integral + sum(rep.pole_masses) * rep.volume - rep.volume) <= 0.02
    assert all(m >= -0.02 for m in rep.pole_masses)
    assert rep.negative_part >= -5 * h
