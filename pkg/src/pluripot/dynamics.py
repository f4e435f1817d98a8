"""Weakly regular polynomial endomorphisms of C^2 and their dynamical Green functions.

A polynomial map ``h = (h1, h2)`` of algebraic degree ``lam`` lifts to
``H = (t^lam, t^lam h1(x/t, y/t), t^lam h2(x/t, y/t))`` on P^2.  Iterates are
computed exactly; the Lelong number of ``lam^-n (h^n)^* omega`` at
``I = {[0:0:1]}`` is ``(lam^n - max(deg_y p_n, deg_y q_n)) / lam^n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy import optimize, stats
from scipy.stats import qmc

from . import geometry as geo
from .geometry import ProjPoint
from .poly import SparsePoly, parse_poly

MAX_MONOMIALS = 10_000_000


def parse_affine(expr: str) -> SparsePoly:
    """Polynomial in ``x, y`` from an expression string such as ``"x^3 + y"``."""
    return parse_poly(expr, ("x", "y"))


def _binary_forms_common_roots(T1: SparsePoly, T2: SparsePoly) -> list[ProjPoint] | None:
    """Common zeros ``[0:x:y]`` of two binary forms in (x, y); None if both vanish identically."""
    import sympy

    from .potentials import _sympy_number

    x, y = sympy.symbols("x y")

    def expr(p):
        return sum(sympy.Rational(str(c)) * x ** e[1] * y ** e[2] for e, c in p.terms.items())

    forms = [expr(p) for p in (T1, T2) if not p.is_zero()]
    if not forms:
        return None
    g = forms[0] if len(forms) == 1 else sympy.gcd(forms[0], forms[1])
    g = sympy.Poly(g, x, y)
    if g.total_degree() == 0:
        return []
    pts = []
    univ = sympy.Poly(g.as_expr().subs(x, 1), y)
    for r in sympy.roots(univ).keys():
        pts.append(ProjPoint("P2", ((0, 1, _sympy_number(r)),)))
    if univ.degree() < g.total_degree():
        pts.append(ProjPoint("P2", ((0, 0, 1),)))
    return pts


@dataclass(frozen=True)
class WeakRegularity:
    ok: bool
    image: ProjPoint | None
    reason: str = ""

    def __bool__(self):
        return self.ok


@dataclass(eq=False)
class PolyEndo:
    """Homogeneous lift ``H = (H0, H1, H2)`` in ``(t, x, y)`` of a polynomial endomorphism."""

    H: tuple[SparsePoly, SparsePoly, SparsePoly]
    lam: int
    indeterminacy: list[ProjPoint] | None
    _iterates: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.lam < 2:
            raise ValueError("algebraic degree must exceed 1")
        for c in self.H:
            if c.with_grading((3,)).degree != (self.lam,):
                raise ValueError("lift components must be homogeneous of degree lam")
        self._iterates.setdefault(1, self.H)

    @property
    def affine(self) -> tuple[SparsePoly, SparsePoly]:
        """``h(x, y) = (H1, H2)(1, x, y)`` (the lift has ``H0 = t^lam``)."""
        out = []
        for c in self.H[1:]:
            terms = {}
            for e, v in c.substitute({0: 1}).terms.items():
                terms[(e[1], e[2])] = v
            out.append(SparsePoly(2, terms))
        return out[0], out[1]

    @property
    def is_holomorphic(self) -> bool:
        return self.indeterminacy == []

    @cached_property
    def sup_constant(self) -> float:
        """``max over the unit sphere of lam^-1 log||H||``: subtracting it makes psi <= 0."""
        return _sup_log_norm(self.H) / self.lam

    def eval_lift(self, S: np.ndarray) -> np.ndarray:
        """``H`` on an array of homogeneous points (first axis of length 3)."""
        return np.stack([c.eval(list(S)) for c in self.H])

    def to_json(self) -> dict:
        h1, h2 = self.affine
        return {"h1": h1.to_json(), "h2": h2.to_json()}


def lift(h: Sequence[SparsePoly | str]) -> PolyEndo:
    """Homogenize ``h = (h1, h2)`` to degree ``lam = max deg`` and compute the indeterminacy set."""
    if len(h) != 2:
        raise ValueError("need two components")
    h = [parse_affine(p) if isinstance(p, str) else p for p in h]
    if any(p.nvars != 2 for p in h):
        raise ValueError("components must be polynomials in (x, y)")
    if any(not p.is_integral() for p in h):
        raise ValueError("coefficients must be integers (exact big-integer iteration)")
    lam = max(p.total_degree() for p in h)
    if lam <= 1:
        raise ValueError("algebraic degree must exceed 1")
    comps = [SparsePoly.monomial((lam, 0, 0), grading=(3,))]
    for p in h:
        comps.append(SparsePoly(3, {(lam - a - b, a, b): c for (a, b), c in p.terms.items()}, grading=(3,)))
    return _from_components(tuple(comps), lam)


def _from_components(H: tuple, lam: int, cache: dict | None = None) -> PolyEndo:
    tops = [c.substitute({0: 0}) for c in H[1:]]
    tops = [SparsePoly(3, {e: v for e, v in t.terms.items()}) for t in tops]
    I = _binary_forms_common_roots(*tops)
    if I is None:
        raise ValueError("the line at infinity is indeterminate (degree drops)")
    e = PolyEndo(H, lam, I)
    if cache:
        e._iterates.update(cache)
    return e


def weakly_regular_check(e: PolyEndo) -> WeakRegularity:
    """Does ``H`` send ``{t=0}`` minus ``I`` to a single point outside ``I``?"""
    if not e.indeterminacy:
        return WeakRegularity(False, None, "indeterminacy set is empty (holomorphic on P^2)")
    import sympy

    x, y = sympy.symbols("x y")
    forms = []
    for c in e.H[1:]:
        t0 = c.substitute({0: 0})
        forms.append(sum(sympy.Rational(str(v)) * x ** k[1] * y ** k[2] for k, v in t0.terms.items()))
    nz = [f for f in forms if f != 0]
    g = nz[0] if len(nz) == 1 else sympy.gcd(nz[0], nz[1])
    reduced = [sympy.cancel(f / g) for f in forms]
    if any(not r.is_number for r in reduced):
        return WeakRegularity(False, None, "the line at infinity is not contracted to a point")
    from .potentials import _sympy_number

    Z = ProjPoint("P2", ((0, _sympy_number(reduced[0]), _sympy_number(reduced[1])),))
    if any(Z == p for p in e.indeterminacy):
        return WeakRegularity(False, Z, "the image of the line at infinity lies in I")
    return WeakRegularity(True, Z)


def _estimated_monomials(degree: int) -> int:
    return math.comb(degree + 2, 2)


def iterate_lift(e: PolyEndo, n: int) -> PolyEndo:
    """Exact lift of ``h^n``: components ``(t^(lam^n), p_n, q_n)`` with big-integer coefficients."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n == 1:
        return e
    if _estimated_monomials(e.lam**n) > MAX_MONOMIALS:
        raise ValueError(f"iterate {n} would have up to {_estimated_monomials(e.lam**n)} monomials")
    k = max(m for m in e._iterates if m <= n)
    cur = e._iterates[k]
    while k < n:
        # H^(k+1) = H^k o H : substitute the low-degree H into the high-degree iterate
        cur = tuple(c.compose(list(e.H), grading=(3,)) for c in cur)
        k += 1
        e._iterates[k] = cur
    return _from_components(cur, e.lam**n)


def _check_single_pole(e: PolyEndo):
    if not e.indeterminacy:
        raise ValueError("holomorphic map: no indeterminacy point, no Green pole")
    if len(e.indeterminacy) != 1 or e.indeterminacy[0] != ProjPoint.of("P2", 0, 0, 1):
        raise ValueError("Lelong formula needs I = {[0:0:1]}")
    wr = weakly_regular_check(e)
    if not wr:
        raise ValueError(f"map is not weakly regular: {wr.reason}")


def nu_n_exact(e: PolyEndo, n: int) -> Fraction:
    """``(lam^n - max(deg_y p_n, deg_y q_n)) / lam^n``."""
    _check_single_pole(e)
    it = iterate_lift(e, n)
    D = e.lam**n
    degy = max(it.H[1].degree_in(2), it.H[2].degree_in(2))
    return Fraction(D - degy, D)


def nu_sequence(e: PolyEndo, n_max: int) -> list[Fraction]:
    return [nu_n_exact(e, n) for n in range(1, n_max + 1)]


def _sup_log_norm(H) -> float:
    """``max log||H(s)||`` over unit vectors ``s`` of C^3, by sampling then local refinement."""
    pts = qmc.Sobol(6, seed=3).random(4096)
    g = stats.norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))

    def value(v):
        s = v[:3] + 1j * v[3:]
        s = s / np.linalg.norm(s)
        return geo._log_norm(np.array([c.eval(list(s)) for c in H]))

    vals = np.array([value(v) for v in g])
    best = -np.inf
    for i in np.argsort(vals)[-8:]:
        res = optimize.minimize(lambda v: -value(v), g[i], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        best = max(best, -res.fun, vals[i])
    return float(best)


def _orbit_sum(e: PolyEndo, S: np.ndarray, n: int) -> np.ndarray:
    """``sum_{j<n} lam^-j (psi - M)`` along renormalized orbits of the columns of ``S``."""
    S = np.asarray(S, dtype=complex)
    nrm = np.sqrt(np.sum(np.abs(S) ** 2, axis=0))
    S = S / nrm
    M = e.sup_constant
    total = np.zeros(S.shape[1:])
    hit = np.zeros(S.shape[1:], bool)
    for j in range(n):
        V = e.eval_lift(S)
        with np.errstate(divide="ignore", invalid="ignore"):
            ln = geo._log_norm(V)
            total += (ln / e.lam - M) / e.lam**j
            scale = np.sqrt(np.sum(np.abs(V) ** 2, axis=0))
            S = V / np.where(scale > 0, scale, 1.0)
        hit |= ~np.isfinite(ln)
    return np.where(hit, -np.inf, total)


def dyn_green_eval(e: PolyEndo, n: int, p: ProjPoint) -> float:
    """``g_n(p) = sum_{j<n} lam^-j psi(h^j p)`` with ``psi = lam^-1 log||H(s)|| - log||s|| - M``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if p.space != "P2":
        raise ValueError("point must lie on P2")
    if e.indeterminacy and any(p == q for q in e.indeterminacy):
        raise ValueError("point lies in the indeterminacy set")
    S = np.array([complex(c) for c in p.flat])[:, None]
    v = float(_orbit_sum(e, S, n)[0])
    if not np.isfinite(v):
        raise ValueError("orbit hits the indeterminacy set")
    return v


@dataclass(frozen=True)
class DynGreen:
    """``g_n`` as an evaluable potential on P^2."""

    endo: PolyEndo
    n: int
    space: str = "P2"

    def eval_affine(self, chart: int, Z) -> np.ndarray:
        H = geo.homogeneous_from_affine("P2", chart, Z)
        S = np.stack(H)
        return _orbit_sum(self.endo, S.reshape(3, -1), self.n).reshape(S.shape[1:])


@dataclass(frozen=True)
class IestProbe:
    exponent: float
    distances: np.ndarray
    image_distances: np.ndarray


def iest_probe(e: PolyEndo, radii: Sequence[float] = tuple(10.0 ** -np.arange(1, 6)), samples: int = 512) -> IestProbe:
    """Fit ``log dist(h(p), I) ~ delta * log dist(p, I)`` from the worst samples at each radius.

    Diagnostic only: the fitted exponent carries no guarantee.
    """
    if not e.indeterminacy:
        raise ValueError("no indeterminacy set")
    pole = e.indeterminacy[0]
    chart = pole.home_chart()
    c = pole.affine(chart)
    dirs = np.exp(2j * np.pi * qmc.Sobol(2, seed=5).random(samples))
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    worst = []
    for r in radii:
        Z = c + r * dirs
        S = np.stack(geo.homogeneous_from_affine("P2", chart, Z))
        V = e.eval_lift(S)
        pts = [ProjPoint("P2", (tuple(V[:, k]),)) for k in range(samples) if np.any(V[:, k] != 0)]
        d = [min(geo.chordal_distance(q, p0) for p0 in e.indeterminacy) for q in pts]
        worst.append(min(d) if d else 0.0)
    worst = np.array(worst)
    ok = worst > 0
    fit = stats.linregress(np.log(np.asarray(radii)[ok]), np.log(worst[ok]))
    return IestProbe(float(fit.slope), np.asarray(radii), worst)


def family_map(lam: int, mu: int) -> PolyEndo:
    """``h = (x^lam + y^mu, x)``."""
    x, y = SparsePoly.var(0, 2), SparsePoly.var(1, 2)
    return lift((x**lam + y**mu, x))


def henon_map(lam: int = 3) -> PolyEndo:
    """``h = (x^lam + y, x)``."""
    return family_map(lam, 1)
