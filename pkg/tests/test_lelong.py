import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pluripot import potentials as pot
from pluripot.acceptance import exact_lelong_cases, two_conic_green
from pluripot.geometry import KClass, ProjPoint
from pluripot.lelong import lelong_estimate, sphere_directions, sphere_mean


@dataclass
class Affine:
    """Test potential given directly as a function of chart-0 coordinates."""

    f: object
    space: str = "P2"

    def eval_affine(self, chart, Z):
        return self.f(np.asarray(Z))


origin = ProjPoint.of("P2", 1, 0, 0)


def test_directions_on_unit_sphere():
    d = sphere_directions("P2", 1024)
    assert np.allclose(np.linalg.norm(d, axis=1), 1)
    # second moments of the uniform measure on S^3: E|u1|^2 = 1/2
    assert abs(np.mean(np.abs(d[:, 0]) ** 2) - 0.5) < 1e-3
    assert np.allclose(np.abs(sphere_directions("P1", 64)), 1)


@pytest.mark.parametrize("r", [0.5, 0.1, 1e-3])
def test_log_norm_mean(r):
    phi = Affine(lambda Z: np.log(np.linalg.norm(Z, axis=-1)))
    assert abs(sphere_mean(phi, origin, r) - math.log(r)) <= 1e-3


@given(st.floats(-50, 50))
def test_constant_mean(c):
    phi = Affine(lambda Z: np.full(Z.shape[0], c))
    assert math.isclose(sphere_mean(phi, origin, 0.2, samples=256), c, abs_tol=1e-12)


def test_coordinate_log_mean():
    # E log|u1| on S^3 = (1/2) E log s for s uniform = -1/2
    phi = Affine(lambda Z: np.log(np.abs(Z[:, 0])))
    r = 0.1
    assert abs(sphere_mean(phi, origin, r) - (math.log(r) - 0.5)) < 5e-3


def test_cusp_and_conic_estimates():
    est = lelong_estimate(pot.make_cusp_green(3, 2), origin)
    assert abs(est.slope - 2 / 3) <= 0.02
    est = lelong_estimate(two_conic_green(), ProjPoint.of("P2", 1, 1, 1))
    assert abs(est.slope - 0.5) <= 0.02


def test_smooth_potential_has_zero_slope():
    est = lelong_estimate(pot.ZeroPotential(KClass.pn(2)), ProjPoint.of("P2", 1, Fraction(1, 2), 2))
    assert abs(est.slope) <= 0.01


def test_all_exact_cases_agree():
    for label, phi, p, exact in exact_lelong_cases():
        est = lelong_estimate(phi, p)
        assert abs(est.slope - float(exact)) <= 0.02, label


def test_rows_and_monotone_radii():
    est = lelong_estimate(pot.make_cusp_green(2, 1), origin, levels=6)
    rows = est.rows()
    assert len(rows) == 6 and math.isnan(rows[0][2])
    assert all(a[0] > b[0] for a, b in zip(rows, rows[1:]))


def test_parameter_validation():
    phi = pot.make_cusp_green(2, 1)
    with pytest.raises(ValueError):
        sphere_mean(phi, origin, 0.6)
    with pytest.raises(ValueError):
        lelong_estimate(phi, origin, levels=3)
    with pytest.raises(ValueError):
        lelong_estimate(phi, origin, samples=10)
    with pytest.raises(ValueError):
        lelong_estimate(phi, ProjPoint.of("P1", 1, 0))


def test_pole_set_through_sphere_rejected():
    # log|z1| is -inf on a whole hyperplane through the center; direction samples never hit it exactly,
    # but a potential that is -inf on a large set must be refused
    phi = Affine(lambda Z: np.where(Z[:, 0].real > 0, -np.inf, 0.0))
    with pytest.raises(ValueError):
        sphere_mean(phi, origin, 0.1)


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_scaling(c):
    phi = pot.make_cusp_green(3, 2)
    a = lelong_estimate(phi, origin)
    b = lelong_estimate(pot.scaled(phi, c), origin)
    assert abs(b.slope - c * a.slope) <= 3 * (b.stderr + c * a.stderr) + 1e-9
