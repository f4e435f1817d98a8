"""Green functions of quasi-psh type on P^n and P^1 x P^1: exact Lelong numbers,
convex envelopes, grid Monge-Ampère measures and dynamical Green functions."""

__version__ = "0.1.0"

from .geometry import KClass, ProjPoint, chordal_distance, fs_potential, indicators, volume
from .lelong import LelongEstimate, lelong_estimate, sphere_mean
from .poly import GaussQ, SparsePoly
from .potentials import (
    LogNormPotential,
    eval_potential,
    lelong_exact,
    make_cusp_green,
    make_greenp1_family,
    make_hyperplane_avg,
    make_rab,
    make_rational_green,
    phi_forward,
    phi_inverse,
)

__all__ = [
    "GaussQ",
    "KClass",
    "LelongEstimate",
    "LogNormPotential",
    "ProjPoint",
    "SparsePoly",
    "__version__",
    "chordal_distance",
    "eval_potential",
    "fs_potential",
    "indicators",
    "lelong_estimate",
    "lelong_exact",
    "make_cusp_green",
    "make_greenp1_family",
    "make_hyperplane_avg",
    "make_rab",
    "make_rational_green",
    "phi_forward",
    "phi_inverse",
    "sphere_mean",
    "volume",
]
