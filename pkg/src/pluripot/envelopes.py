"""Radial and toric partial Green functions as constrained convex envelopes.

In logarithmic coordinates ``x = log|z|`` (radial, P^n) or
``(x, y) = (log|z1|, log|w1|)`` (toric, P^1 x P^1 chart at p = ((1:0),(1:0)))
torus-invariant potentials are convex functions.  The Lelong constraint at
``p`` becomes an asymptotic slope condition at ``-inf``; on the dual side it is
the cut ``s + t >= gamma`` of the moment rectangle ``[0,a] x [0,b]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from . import geometry as geo

CONVEX_TOL_1D = 1e-9
CONVEX_TOL_2D = 1e-7


def fs_profile(x):
    """Fubini-Study obstacle ``(1/2) log(1 + e^{2x})``, overflow-safe."""
    return 0.5 * np.logaddexp(0.0, 2.0 * np.asarray(x, dtype=float))


# -- radial --------------------------------------------------------------


@dataclass(frozen=True)
class RadialProfile:
    x: np.ndarray
    w: np.ndarray
    slope_at_minus_inf: Fraction | None = None
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if x.ndim != 1 or x.size < 3 or x.shape != w.shape:
            raise ValueError("profile needs matching 1-D grids with at least 3 points")
        dx = np.diff(x)
        if not np.allclose(dx, dx[0], rtol=1e-9, atol=0) or dx[0] <= 0:
            raise ValueError("x grid must be uniform and increasing")
        if not np.all(np.isfinite(w)):
            raise ValueError("profile values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.w) / self.dx

    def is_convex(self, tol: float = CONVEX_TOL_1D) -> bool:
        return bool(np.all(np.diff(self.slopes) >= -tol))

    def is_valid(self) -> bool:
        s = self.slopes
        wt = float(self.weight)
        return self.is_convex() and bool(np.all(s >= -CONVEX_TOL_1D)) and bool(np.all(s <= wt + CONVEX_TOL_1D))


def radial_grid(points: int = 4096, x_min: float = -10.0, x_max: float = 10.0) -> np.ndarray:
    return np.linspace(x_min, x_max, points)


def fs_obstacle(points: int = 4096, x_min: float = -10.0, x_max: float = 10.0) -> RadialProfile:
    x = radial_grid(points, x_min, x_max)
    return RadialProfile(x, fs_profile(x))


@dataclass(frozen=True)
class RadialGreen:
    """Closed-form partial Green function with Lelong number ``gamma`` at [1:0:...:0] on P^n.

    ``V(x) = gamma*x + C`` for ``x <= log R`` and the Fubini-Study obstacle beyond;
    ``psi = V(log||z||) - (1/2) log(1 + ||z||^2)`` in the chart ``z_0 = 1``.
    ``gamma = 1`` gives the limit ``log(||z|| / sqrt(1 + ||z||^2))``.
    """

    gamma: Fraction
    n: int
    R: float
    C: float

    @property
    def space(self) -> str:
        return f"P{self.n}"

    def V(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.gamma == 1:
            return x
        g = float(self.gamma)
        return np.where(x <= math.log(self.R), g * x + self.C, fs_profile(x))

    def psi_of_norm(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            x = np.log(r)
            if self.gamma == 1:
                return x - fs_profile(x)
            g = float(self.gamma)
            inside = g * x + self.C - fs_profile(x)
        return np.where(r < self.R, inside, 0.0)

    def profile(self, points: int = 4096, x_min: float = -10.0, x_max: float = 10.0) -> RadialProfile:
        x = radial_grid(points, x_min, x_max)
        return RadialProfile(x, self.V(x), slope_at_minus_inf=self.gamma)

    def eval_affine(self, chart: int, Z) -> np.ndarray:
        """Evaluable-potential interface on P^n (pole at the origin of chart 0)."""
        H = geo.homogeneous_from_affine(self.space, chart, Z)
        t = np.abs(H[0])
        rest = np.sqrt(sum(np.abs(h) ** 2 for h in H[1:]))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = rest / t
        # points at infinity lie outside every ball, where psi vanishes
        return np.where(t > 0, self.psi_of_norm(np.where(t > 0, r, 1.0)), 0.0)


def radial_partial_green(gamma, n: int = 2) -> RadialGreen:
    """Closed form: ``R = sqrt(gamma / (1 - gamma))`` and ``gamma log R + C = log sqrt(1 + R^2)``."""
    gamma = Fraction(gamma)
    if n < 1:
        raise ValueError("n must be positive")
    if gamma == 1:
        return RadialGreen(gamma, n, math.inf, 0.0)
    if not 0 < gamma < 1:
        raise ValueError("gamma must lie in (0, 1) (Seshadri bound on P^n)")
    g = float(gamma)
    R = math.sqrt(g / (1 - g))
    C = 0.5 * math.log1p(R * R) - g * math.log(R)
    return RadialGreen(gamma, n, R, C)


def radial_envelope(obstacle: RadialProfile, gamma) -> RadialProfile:
    """Largest convex minorant of ``obstacle`` whose slope at ``-inf`` is at least ``gamma``.

    The obstacle is replaced left of its tangency point by the ray of slope ``gamma``.
    The tangency point is located to second order from the bracketing secant slopes.
    """
    gamma = Fraction(gamma)
    g = float(gamma)
    if not obstacle.is_convex():
        raise ValueError("obstacle is not convex on its grid")
    s = obstacle.slopes
    x, w, dx = obstacle.x, obstacle.w, obstacle.dx
    if np.all(np.abs(s - g) <= 1e-12):
        return replace(obstacle, slope_at_minus_inf=gamma)
    if s[0] > g + 1e-12 or s[-1] < g:
        raise ValueError(f"obstacle slopes [{s[0]:.3g}, {s[-1]:.3g}] never cross gamma={g} on the grid")
    # secant slope s[k] approximates the derivative at the midpoint of cell k
    k = int(np.searchsorted(s, g))
    if k == 0:
        xs, ws = x[0], w[0]
    else:
        m0, m1 = x[k - 1] + dx / 2, x[k] + dx / 2
        frac = (g - s[k - 1]) / (s[k] - s[k - 1]) if s[k] > s[k - 1] else 0.5
        xs = m0 + frac * (m1 - m0)
        # quadratic through (x[k-1], x[k], x[k+1]) for the value at xs
        j = min(max(k, 1), len(x) - 2)
        xa, xb, xc = x[j - 1], x[j], x[j + 1]
        wa, wb, wc = w[j - 1], w[j], w[j + 1]
        ws = (
            wa * (xs - xb) * (xs - xc) / ((xa - xb) * (xa - xc))
            + wb * (xs - xa) * (xs - xc) / ((xb - xa) * (xb - xc))
            + wc * (xs - xa) * (xs - xb) / ((xc - xa) * (xc - xb))
        )
    out = np.where(x <= xs, ws + g * (x - xs), w)
    return RadialProfile(x, np.minimum(out, w) if k == 0 else out, slope_at_minus_inf=gamma, weight=obstacle.weight)


# -- Legendre transforms -------------------------------------------------


def _legendre_1d(x: np.ndarray, f: np.ndarray, s: np.ndarray, chunk: int = 512) -> np.ndarray:
    out = np.empty(s.shape)
    for i in range(0, s.size, chunk):
        ss = s[i : i + chunk]
        out[i : i + chunk] = np.max(ss[:, None] * x[None, :] - f[None, :], axis=1)
    return out


def _legendre_2d(x, y, F, s, t):
    """``F*(s,t) = max_x [s x + max_y (t y - F(x, y))]`` computed as two 1-D passes."""
    inner = np.max(t[None, :, None] * y[None, None, :] - F[:, None, :], axis=2)  # (nx, nt)
    return np.max(s[:, None, None] * x[None, :, None] + inner[None, :, :], axis=1)  # (ns, nt)


@dataclass(frozen=True)
class DualSample:
    """Samples of a Legendre transform on a uniform grid over the gradient range."""

    s: np.ndarray
    values: np.ndarray
    t: np.ndarray | None = None


def legendre(f, dual_points: int | None = None) -> DualSample:
    """Discrete Legendre transform ``f*(s) = max_x (<s, x> - f(x))`` over the moment range."""
    if isinstance(f, RadialProfile):
        if f.x.size == 0:
            raise ValueError("empty grid")
        m = dual_points or f.x.size
        s = np.linspace(0.0, float(f.weight), m)
        return DualSample(s, _legendre_1d(f.x, f.w, s))
    if isinstance(f, ToricGrid):
        m = dual_points or DEFAULT_DUAL
        s = np.linspace(0.0, float(f.a), m)
        t = np.linspace(0.0, float(f.b), m)
        return DualSample(s, _legendre_2d(f.x, f.y, f.w, s, t), t)
    raise TypeError("legendre expects a RadialProfile or ToricGrid")


def legendre_back(dual: DualSample, x: np.ndarray) -> np.ndarray:
    """Inverse transform of a 1-D dual sample onto a primal grid ``x``."""
    return _legendre_1d(dual.s, dual.values, np.asarray(x, dtype=float))


# -- toric ---------------------------------------------------------------

DEFAULT_PRIMAL = 257
DEFAULT_DUAL = 129
DEFAULT_L = 4.0


@dataclass(frozen=True)
class ToricGrid:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    a: Fraction
    b: Fraction
    gamma: Fraction = Fraction(0)

    def __post_init__(self):
        x, y = np.asarray(self.x, float), np.asarray(self.y, float)
        w = np.asarray(self.w, float)
        if w.shape != (x.size, y.size) or x.size < 3 or y.size < 3:
            raise ValueError("values must be sampled on the full x-by-y grid")
        for v in (x, y):
            d = np.diff(v)
            if d[0] <= 0 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
                raise ValueError("grid must be uniform and increasing")
        if not np.all(np.isfinite(w)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        object.__setattr__(self, "gamma", Fraction(self.gamma))

    @property
    def spacing(self) -> float:
        return float(self.x[1] - self.x[0])

    def hessian_minors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Discrete ``w_xx``, ``w_yy`` and Hessian determinant at interior points."""
        w, hx, hy = self.w, self.spacing, float(self.y[1] - self.y[0])
        wxx = (w[2:, 1:-1] - 2 * w[1:-1, 1:-1] + w[:-2, 1:-1]) / hx**2
        wyy = (w[1:-1, 2:] - 2 * w[1:-1, 1:-1] + w[1:-1, :-2]) / hy**2
        wxy = (w[2:, 2:] - w[2:, :-2] - w[:-2, 2:] + w[:-2, :-2]) / (4 * hx * hy)
        return wxx, wyy, wxx * wyy - wxy**2

    def is_convex(self, tol: float = CONVEX_TOL_2D) -> bool:
        """Midpoint convexity along the axes and both diagonals (the discrete minors on a grid)."""
        w = self.w
        checks = [
            w[2:, :] - 2 * w[1:-1, :] + w[:-2, :],
            w[:, 2:] - 2 * w[:, 1:-1] + w[:, :-2],
            w[2:, 2:] - 2 * w[1:-1, 1:-1] + w[:-2, :-2],
            w[2:, :-2] - 2 * w[1:-1, 1:-1] + w[:-2, 2:],
        ]
        return all(bool(np.all(c >= -tol)) for c in checks)

    def gradients_in_polytope(self, tol: float = 1e-9) -> bool:
        gx = np.diff(self.w, axis=0) / self.spacing
        gy = np.diff(self.w, axis=1) / float(self.y[1] - self.y[0])
        return bool(gx.min() >= -tol and gx.max() <= float(self.a) + tol and gy.min() >= -tol and gy.max() <= float(self.b) + tol)


def toric_fs_obstacle(a=1, b=1, L: float = DEFAULT_L, points: int = DEFAULT_PRIMAL) -> ToricGrid:
    """``h(x, y) = a*(1/2)log(1+e^{2x}) + b*(1/2)log(1+e^{2y})``, the FS potential of class (a, b)."""
    a, b = Fraction(a), Fraction(b)
    if a <= 0 or b <= 0:
        raise ValueError("class must be Kähler")
    x = np.linspace(-L, L, points)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return ToricGrid(x, x.copy(), float(a) * fs_profile(X) + float(b) * fs_profile(Y), a, b)


def toric_envelope(h: ToricGrid, gamma, dual_points: int = DEFAULT_DUAL) -> ToricGrid:
    """Invariant envelope ``w = max_{(s,t) in K} (s x + t y - h*(s, t))`` with ``K = {s + t >= gamma}``."""
    gamma = Fraction(gamma)
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    if gamma > h.a + h.b:
        raise ValueError(f"constraint polygon is empty: gamma={gamma} > a+b={h.a + h.b}")
    if gamma > min(h.a, h.b):
        raise ValueError(f"gamma={gamma} exceeds the Seshadri constant min(a,b)={min(h.a, h.b)}")
    if not h.is_convex():
        raise ValueError("obstacle is not convex")
    dual = legendre(h, dual_points)
    s, t = dual.s, dual.t
    S, T = np.meshgrid(s, t, indexing="ij")
    D = np.where(S + T >= float(gamma) - 1e-12, -dual.values, -np.inf)
    # w(x, y) = max_s [s x + max_t (t y + D(s, t))]
    inner = np.max(t[None, :, None] * h.y[None, None, :] + D[:, :, None], axis=1)  # (ns, ny)
    w = np.max(s[:, None, None] * h.x[None, :, None] + inner[:, None, :], axis=0)  # (nx, ny)
    w = np.minimum(w, h.w)
    return ToricGrid(h.x, h.y, w, h.a, h.b, gamma)


def unit_toric_closed_form(x, y) -> np.ndarray:
    """Envelope at a = b = gamma = 1: ``log(e^x + e^y)`` on ``{x + y <= 0}`` and the obstacle elsewhere."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return np.where(x + y <= 0, np.logaddexp(x, y), fs_profile(x) + fs_profile(y))


def psi_unit_toric(z1, w1) -> np.ndarray:
    """``psi_{1,p} = log(|z1| + |w1|) - rho`` on ``{|z1 w1| <= 1}`` and 0 elsewhere (chart z0 = w0 = 1)."""
    a, b = np.abs(np.asarray(z1, complex)), np.abs(np.asarray(w1, complex))
    rho = 0.5 * np.log1p(a * a) + 0.5 * np.log1p(b * b)
    with np.errstate(divide="ignore"):
        return np.where(a * b <= 1, np.log(a + b) - rho, 0.0)


@dataclass(frozen=True)
class ToricMasses:
    dirac_mass: float
    boundary_mass: float
    interior_mass: float
    ambiguous_fraction: float

    @property
    def total(self) -> float:
        return self.dirac_mass + self.boundary_mass + self.interior_mass


def _trapezoid_weights(n: int, length: float) -> np.ndarray:
    wts = np.full(n, length / (n - 1))
    wts[0] = wts[-1] = length / (2 * (n - 1))
    return wts


def toric_ma_masses(w: ToricGrid, gamma=None, h: ToricGrid | None = None, dual_points: int = DEFAULT_DUAL, contact_tol: float = 2e-3, tie_tol: float = 1e-10, max_ambiguous: float = 0.02) -> ToricMasses:
    """Monge-Ampère masses from the gradient image of ``w``.

    Each dual point ``(s, t)`` of the moment rectangle is assigned to the grid point
    where ``s x + t y - w`` is maximal: the lower-left edges off the contact set
    (slope never attained, mass at the pole), the contact set ``{w = h}``, or the
    remaining open set.  Masses are ``2 x`` the dual areas.
    """
    gamma = w.gamma if gamma is None else Fraction(gamma)
    if h is None:
        h = toric_fs_obstacle(w.a, w.b, L=float(w.x[-1]), points=w.x.size)
    gap = h.w - w.w
    X, Y = np.meshgrid(w.x, w.y, indexing="ij")
    edge = (X == w.x[0]) | (Y == w.y[0])
    cls = np.where(gap <= contact_tol, 1, np.where(edge, 0, 2)).ravel()

    s = np.linspace(0.0, float(w.a), dual_points)
    t = np.linspace(0.0, float(w.b), dual_points)
    cls = cls.reshape(w.w.shape)
    best = np.empty((dual_points, dual_points, 3))
    for c in range(3):
        # Legendre transform of w restricted to one class (+inf elsewhere)
        best[:, :, c] = _legendre_2d(w.x, w.y, np.where(cls == c, w.w, np.inf), s, t)
    order = np.sort(best, axis=2)
    winner = np.argmax(best, axis=2)
    ambiguous = (order[:, :, 2] - order[:, :, 1]) <= tie_tol * np.maximum(1.0, np.abs(order[:, :, 2]))
    area = np.outer(_trapezoid_weights(dual_points, float(w.a)), _trapezoid_weights(dual_points, float(w.b)))
    total_area = float(area.sum())
    if abs(total_area - float(w.a * w.b)) > 1e-9:
        raise AssertionError("dual quadrature does not reproduce the area of the moment rectangle")
    amb = float(area[ambiguous].sum() / total_area)
    if amb > max_ambiguous:
        raise ValueError(f"{amb:.1%} of the dual rectangle is ambiguous; refine the grid")
    # the n! = 2 factor converts gradient-image area to Monge-Ampère mass
    mass = [2.0 * float(area[winner == c].sum()) for c in range(3)]
    return ToricMasses(mass[0], mass[1], mass[2], amb)


def diagonal_slope(w: ToricGrid, steps: int = 1) -> float:
    """Slope of ``w`` along the diagonal at the lower-left grid corner."""
    d = w.spacing * steps
    return float((w.w[steps, steps] - w.w[0, 0]) / d)
