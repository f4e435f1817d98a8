"""Grid Monge-Ampère measures on complex surfaces (P^2 and P^1 x P^1).

The density of ``(dd^c u)^2`` in an affine chart is ``(8/pi^2) det(u_{z_i zbar_j})``
times Lebesgue measure on R^4; the constant follows from ``d^c = (i/4pi)(dbar - d)``
and is checked by the Fubini-Study calibration (total mass 1 on P^2).  Charts are
glued with the partition of unity ``|Z_i|^(2q) / sum_j |Z_j|^(2q)`` built from the
homogeneous coordinates.  Poles are cut out by Euclidean balls in each chart and
their masses are recovered from the defect ``V - smooth integral``, split among
poles in proportion to their boundary fluxes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numba
import numpy as np
from scipy.stats import qmc

from . import geometry as geo
from .geometry import KClass, ProjPoint
from .potentials import local_potential

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the always-available layer; avoids probing an outdated TBB at first launch
    numba.config.THREADING_LAYER = "workqueue"

MA_CONST = 8.0 / math.pi**2
PARTITION_POWER = 8
MASS_TOL = 0.02
DEFAULT_H = 0.05
FAST_H = 0.1
DEFAULT_BOX = 2.0

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_D1_2 = np.array([0.0, -0.5, 0.0, 0.5, 0.0])
_D2_2 = np.array([0.0, 1.0, -2.0, 1.0, 0.0])


@numba.njit(cache=True, parallel=True)
def _det_slab(S, h, d1, d2, out):
    """Complex Hessian determinant on the middle slab of five (x1 = -2h..2h).

    ``S[a, j, k, l]`` samples u at (x1 + (a-2) h, y1_j, x2_k, y2_l); the last three
    axes carry two ghost cells on each side.  ``out`` has the unpadded shape.
    """
    n1, n2, n3 = out.shape
    ih2 = 1.0 / (h * h)
    for j in numba.prange(n1):
        for k in range(n2):
            for l in range(n3):
                jj, kk, ll = j + 2, k + 2, l + 2
                uxx = 0.0
                uyy = 0.0
                vxx = 0.0
                vyy = 0.0
                for a in range(5):
                    c = d2[a]
                    if c != 0.0:
                        uxx += c * S[a, jj, kk, ll]
                        uyy += c * S[2, jj + a - 2, kk, ll]
                        vxx += c * S[2, jj, kk + a - 2, ll]
                        vyy += c * S[2, jj, kk, ll + a - 2]
                x1x2 = 0.0
                y1y2 = 0.0
                x1y2 = 0.0
                y1x2 = 0.0
                for a in range(5):
                    if d1[a] == 0.0:
                        continue
                    for b in range(5):
                        if d1[b] == 0.0:
                            continue
                        c = d1[a] * d1[b]
                        x1x2 += c * S[a, jj, kk + b - 2, ll]
                        y1y2 += c * S[2, jj + a - 2, kk, ll + b - 2]
                        x1y2 += c * S[a, jj, kk, ll + b - 2]
                        y1x2 += c * S[2, jj + a - 2, kk + b - 2, ll]
                A = 0.25 * (uxx + uyy) * ih2
                D = 0.25 * (vxx + vyy) * ih2
                br = 0.25 * (x1x2 + y1y2) * ih2
                bi = 0.25 * (x1y2 - y1x2) * ih2
                out[j, k, l] = A * D - br * br - bi * bi


def _stencil(order: int):
    if order == 4:
        return _D1, _D2
    if order == 2:
        return _D1_2, _D2_2
    raise ValueError("stencil order must be 2 or 4")


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float


@dataclass
class ChartGrid:
    """Uniform grid on ``[-L, L]^4`` in one affine chart with a streamed local potential.

    ``u`` maps an array of affine points (last axis of length 2, complex) to the
    local potential ``rho + phi``; it is sampled one x1-slab at a time.
    """

    space: str
    chart: int
    L: float
    h: float
    u: Callable[[np.ndarray], np.ndarray]
    balls: list[Ball] = field(default_factory=list)
    order: int = 4

    def __post_init__(self):
        if self.h <= 0 or self.L <= 0:
            raise ValueError("grid spacing and box must be positive")
        if geo.complex_dim(self.space) != 2:
            raise ValueError("grid Monge-Ampère is implemented for complex surfaces")
        geo.chart_indices(self.space, self.chart)
        n = int(round(2 * self.L / self.h))
        if not math.isclose(n * self.h, 2 * self.L, rel_tol=1e-9):
            raise ValueError("box length must be a multiple of the spacing")
        for b in self.balls:
            if np.any(np.abs(b.center.view(float)) + b.radius > self.L + 1e-12):
                raise ValueError("excluded balls must lie inside the box")
        _stencil(self.order)

    @property
    def axis(self) -> np.ndarray:
        n = int(round(2 * self.L / self.h))
        return np.linspace(-self.L, self.L, n + 1)

    def slab_points(self, x1: float, pad: int = 0) -> np.ndarray:
        ax = self.axis
        if pad:
            ax = np.concatenate([ax[0] - self.h * np.arange(pad, 0, -1), ax, ax[-1] + self.h * np.arange(1, pad + 1)])
        Y1, X2, Y2 = np.meshgrid(ax, ax, ax, indexing="ij")
        return np.stack([x1 + 1j * Y1, X2 + 1j * Y2], axis=-1)

    def excluded(self, Z: np.ndarray) -> np.ndarray:
        mask = np.zeros(Z.shape[:-1], bool)
        for b in self.balls:
            mask |= np.sum(np.abs(Z - b.center) ** 2, axis=-1) < b.radius**2
        return mask


def iter_density_slabs(grid: ChartGrid):
    """Yield ``(x1, Z, density)`` slab by slab; density is ``MA_CONST * det``."""
    d1, d2 = _stencil(grid.order)
    ax = grid.axis
    h = grid.h
    n = ax.size

    def sample(x1):
        with np.errstate(all="ignore"):
            v = np.asarray(grid.u(grid.slab_points(x1, pad=2)), dtype=float)
        return v

    S = np.stack([sample(ax[0] + o * h) for o in (-2, -1, 0, 1, 2)])
    out = np.empty((n, n, n))
    for i in range(n):
        _det_slab(S, h, d1, d2, out)
        yield ax[i], grid.slab_points(ax[i]), MA_CONST * out
        if i + 1 < n:
            S = np.roll(S, -1, axis=0)
            S[4] = sample(ax[i] + 3 * h)


def ma_density(grid: ChartGrid, max_points: int = 60_000_000) -> np.ndarray:
    """Density samples on the whole grid (4-D array, NaN inside excluded balls)."""
    n = grid.axis.size
    if n**4 > max_points:
        raise ValueError(f"grid has {n**4} points; use iter_density_slabs for streamed access")
    out = np.empty((n, n, n, n))
    for i, (x1, Z, dens) in enumerate(iter_density_slabs(grid)):
        dens = np.where(grid.excluded(Z), np.nan, dens)
        kept = ~np.isnan(dens)
        if not np.all(np.isfinite(dens[kept])):
            raise ValueError(f"non-finite samples inside stencil support near x1={x1:.3g}")
        out[i] = dens
    return out


def density_at(u: Callable[[np.ndarray], np.ndarray], z: Sequence[complex], h: float = 1e-3, order: int = 4) -> float:
    """Pointwise density of ``(dd^c u)^2`` at one affine point."""
    z = np.asarray(z, dtype=complex)
    d1, d2 = _stencil(order)
    offs = h * np.arange(-2, 3)
    Y1, X2, Y2 = np.meshgrid(offs, offs, offs, indexing="ij")
    S = np.empty((5, 5, 5, 5))
    for a, o in enumerate(offs):
        Z = np.stack([z[0] + o + 1j * Y1, z[1] + X2 + 1j * Y2], axis=-1)
        S[a] = u(Z)
    out = np.empty((1, 1, 1))
    _det_slab(S, h, d1, d2, out)
    return float(MA_CONST * out[0, 0, 0])


def partition_weight(space: str, chart: int, Z: np.ndarray, q: int = PARTITION_POWER) -> np.ndarray:
    """Weight of ``chart`` in the partition of unity at affine points ``Z`` of that chart."""
    H = geo.homogeneous_from_affine(space, chart, Z)
    idx = geo.chart_indices(space, chart)
    total = 1.0
    k = 0
    for s, i in zip(geo.factor_sizes(space), idx):
        block = [np.abs(H[k + j]) ** 2 for j in range(s)]
        num = block[i] ** q
        total = total * num / sum(b**q for b in block)
        k += s
    return total


# -- boundary flux (mass inside a small ball by Stokes) -------------------

_J = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)


def _sphere_s3(N: int, seed: int) -> np.ndarray:
    u = qmc.Sobol(3, scramble=True, seed=seed).random(N)
    eta = np.arcsin(np.sqrt(u[:, 0]))
    a, b = 2 * np.pi * u[:, 1], 2 * np.pi * u[:, 2]
    return np.stack([np.cos(eta) * np.cos(a), np.cos(eta) * np.sin(a), np.sin(eta) * np.cos(b), np.sin(eta) * np.sin(b)], 1)


def ball_flux(u: Callable[[np.ndarray], np.ndarray], center: Sequence[complex], r: float, samples: int = 8192, seed: int = 7) -> float:
    """``int_{|z - c| = r} d^c u ^ dd^c u``, the Monge-Ampère mass of the ball for psh ``u``."""
    c = np.asarray(center, dtype=complex)
    c4 = np.array([c[0].real, c[0].imag, c[1].real, c[1].imag])
    nrm = _sphere_s3(samples, seed)
    X = c4 + r * nrm
    eps = r * 1e-3
    E = np.eye(4) * eps

    def f(P):
        return np.asarray(u(np.stack([P[:, 0] + 1j * P[:, 1], P[:, 2] + 1j * P[:, 3]], axis=-1)), dtype=float)

    f0 = f(X)
    fp = [f(X + E[a]) for a in range(4)]
    fm = [f(X - E[a]) for a in range(4)]
    g = np.stack([(fp[a] - fm[a]) / (2 * eps) for a in range(4)], axis=1)
    H = np.zeros((samples, 4, 4))
    for a in range(4):
        H[:, a, a] = (fp[a] - 2 * f0 + fm[a]) / eps**2
        for b in range(a + 1, 4):
            v = (f(X + E[a] + E[b]) - f(X + E[a] - E[b]) - f(X - E[a] + E[b]) + f(X - E[a] - E[b])) / (4 * eps**2)
            H[:, a, b] = H[:, b, a] = v
    # d^c u as a 1-form and dd^c u as a 2-form (coefficient matrices), then contract on the sphere frame
    alpha = (g @ _J.T) / (2 * np.pi)
    G = np.einsum("bc,nca->nab", _J, H) / (2 * np.pi)
    B = G - np.transpose(G, (0, 2, 1))
    a_, b_, c_, d_ = nrm.T
    e1 = np.stack([-b_, a_, -d_, c_], 1)
    e2 = np.stack([-c_, d_, a_, -b_], 1)
    e3 = np.stack([-d_, -c_, b_, a_], 1)
    if np.linalg.det(np.stack([nrm[0], e1[0], e2[0], e3[0]])) < 0:
        e3 = -e3

    def A(e):
        return np.einsum("na,na->n", alpha, e)

    def Bf(e, e_):
        return np.einsum("na,nab,nb->n", e, B, e_)

    w = A(e1) * Bf(e2, e3) - A(e2) * Bf(e1, e3) + A(e3) * Bf(e1, e2)
    return float(w.mean() * 2 * np.pi**2 * r**3)


# -- reports ---------------------------------------------------------------


@dataclass
class MAReport:
    smooth_per_chart: list[float]
    pole_masses: list[float]
    flux_masses: list[float]
    volume: float
    h: float
    box: float
    ball_radius: float
    negative_part: float
    order: int = 4
    extras: dict = field(default_factory=dict)

    @property
    def smooth_integral(self) -> float:
        return float(sum(self.smooth_per_chart))

    @property
    def defect(self) -> float:
        """``V - smooth - sum of flux masses``; a consistency diagnostic, not used for the masses."""
        return self.volume - self.smooth_integral - sum(self.flux_masses) * self.volume

    def rows(self) -> list[tuple[str, float]]:
        out = [(f"smooth_chart_{i}", v) for i, v in enumerate(self.smooth_per_chart)]
        out.append(("smooth_integral", self.smooth_integral))
        out += [(f"pole_mass_{i}", m) for i, m in enumerate(self.pole_masses)]
        out += [(f"flux_mass_{i}", m) for i, m in enumerate(self.flux_masses)]
        out += [("volume", self.volume), ("defect", self.defect), ("negative_part", self.negative_part)]
        out += [("h", self.h), ("box", self.box), ("ball_radius", self.ball_radius), ("order", self.order)]
        for chart, marg in sorted(self.extras.get("marginals", {}).items()):
            out += [(f"marginal_chart{chart}_x1={x1:.6g}", v) for x1, v in marg]
        return out


def _pole_center(p: ProjPoint, chart: int):
    try:
        return p.affine(chart)
    except ValueError:
        return None


def chart_balls(space: str, chart: int, poles: Sequence[ProjPoint], ball_radius: float, L: float) -> list[Ball]:
    balls = []
    for p in poles:
        c = _pole_center(p, chart)
        if c is None:
            continue
        if np.all(np.abs(c.view(float)) + ball_radius <= L):
            balls.append(Ball(c, ball_radius))
        elif np.all(np.abs(c.view(float)) - ball_radius < L):
            raise ValueError(f"ball around pole {p} straddles the box of chart {chart}; enlarge the box or shrink the ball")
    return balls


def _check_separation(space: str, poles: Sequence[ProjPoint], ball_radius: float):
    for chart in range(geo.n_charts(space)):
        cs = [c for c in (_pole_center(p, chart) for p in poles) if c is not None]
        for i in range(len(cs)):
            for j in range(i + 1, len(cs)):
                if np.linalg.norm(cs[i] - cs[j]) < 4 * ball_radius:
                    raise ValueError(f"poles closer than 4*ball_radius in chart {chart}")


def ma_report(
    phi,
    poles: Sequence[ProjPoint] = (),
    ball_radius: float = 0.45,
    h: float = DEFAULT_H,
    box: float = DEFAULT_BOX,
    kclass: KClass | None = None,
    order: int = 4,
    flux_radius: float | None = None,
) -> MAReport:
    """Smooth Monge-Ampère integral over all charts minus pole balls, and per-pole masses."""
    kclass = kclass or getattr(phi, "kclass", None)
    if kclass is None:
        raise ValueError("need the cohomology class of the potential")
    space = kclass.space
    poles = list(poles)
    if any(p.space != space for p in poles):
        raise ValueError("pole on a different space")
    _check_separation(space, poles, ball_radius)
    V = float(geo.volume(kclass))
    smooth, neg, marginals = [], 0.0, {}
    for chart in range(geo.n_charts(space)):
        balls = chart_balls(space, chart, poles, ball_radius, box)
        grid = ChartGrid(space, chart, box, h, lambda Z, c=chart: local_potential(phi, kclass, c, Z), balls, order)
        total = 0.0
        marg = []
        for x1, Z, dens in iter_density_slabs(grid):
            keep = ~grid.excluded(Z)
            w = partition_weight(space, chart, Z)
            d = dens[keep]
            if not np.all(np.isfinite(d)):
                raise ValueError(f"non-finite samples inside stencil support (chart {chart}, x1={x1:.3g}); enlarge ball_radius")
            contrib = d * w[keep]
            slab_total = math.fsum(np.sort(contrib))
            marg.append((float(x1), slab_total * h**4))
            total += slab_total
            neg += float(np.minimum(contrib, 0).sum())
        smooth.append(total * h**4)
        marginals[chart] = marg
    neg *= h**4
    s = sum(smooth)
    if s > V + MASS_TOL:
        raise ValueError(f"smooth integral {s:.4f} exceeds the volume {V} (input not quasi-psh?)")
    fluxes = []
    rf = flux_radius or ball_radius / 2
    for p in poles:
        chart = p.home_chart()
        c = p.affine(chart)

        def u(Z, c_=chart):
            return local_potential(phi, kclass, c_, Z)

        m1, m2 = ball_flux(u, c, rf), ball_flux(u, c, 2 * rf)
        fluxes.append(max(2 * m1 - m2, 0.0) / V)
    pole_total = (V - s) / V
    if poles:
        ft = sum(fluxes)
        shares = [f / ft for f in fluxes] if ft > 0 else [1 / len(poles)] * len(poles)
        masses = [pole_total * sh for sh in shares]
    else:
        masses = []
    return MAReport(smooth, masses, fluxes, V, h, box, ball_radius, neg, order, {"marginals": marginals})


@dataclass
class GreenCheck:
    passed: bool
    report: MAReport
    failures: list[str]
    claimed: list[float]

    def __bool__(self):
        return self.passed


def check_green(
    phi,
    poles: Sequence[ProjPoint],
    weights: Sequence,
    ball_radius: float = 0.45,
    h: float = DEFAULT_H,
    box: float = DEFAULT_BOX,
    kclass: KClass | None = None,
    tol: float = MASS_TOL,
    bounded_samples: int = 4096,
    report: MAReport | None = None,
) -> GreenCheck:
    """Verify that ``phi`` is a Green function with masses ``weights`` at ``poles``."""
    weights = [Fraction(w) if not isinstance(w, float) else w for w in weights]
    if len(weights) != len(poles):
        raise ValueError("one weight per pole")
    if abs(float(sum(weights)) - 1.0) > 1e-12:
        raise ValueError("weights must sum to 1")
    rep = report if report is not None else ma_report(phi, poles, ball_radius, h, box, kclass)
    failures = []
    if rep.smooth_integral > tol * rep.volume:
        failures.append(f"smooth density integral {rep.smooth_integral:.4f} > {tol * rep.volume:.4f}")
    for i, (m, w) in enumerate(zip(rep.pole_masses, weights)):
        if abs(m - float(w)) > tol:
            failures.append(f"pole {i}: mass {m:.4f} vs claimed {float(w):.4f}")
    if any(m < -tol for m in rep.pole_masses):
        failures.append("negative pole mass")
    failures += _boundedness_failures(phi, poles, ball_radius, box, bounded_samples)
    return GreenCheck(not failures, rep, failures, [float(w) for w in weights])


def _boundedness_failures(phi, poles, ball_radius, box, samples) -> list[str]:
    space = phi.space
    pts = qmc.Sobol(4, seed=11).random(samples) * 2 * box - box
    Z = np.stack([pts[:, 0] + 1j * pts[:, 1], pts[:, 2] + 1j * pts[:, 3]], axis=-1)
    out = []
    for chart in range(geo.n_charts(space)):
        keep = np.ones(samples, bool)
        for p in poles:
            c = _pole_center(p, chart)
            if c is not None:
                keep &= np.linalg.norm(Z - c, axis=-1) >= ball_radius
        vals = np.asarray(phi.eval_affine(chart, Z[keep]), dtype=float)
        if vals.size and not np.all(np.isfinite(vals)):
            out.append(f"potential unbounded away from the poles in chart {chart}")
    return out
