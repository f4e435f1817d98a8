"""Log-norm quasi-psh potentials built from exact polynomials.

A :class:`LogNormPotential` represents the global function

    phi = scale * log||F(Z)|| + sum_k w_k * log|M_k(Z)| - sum_g ref_g * log||Z_g||

on P^1, P^2 or P^1 x P^1, where ``F`` is a tuple of (bi)homogeneous
polynomials and ``Z_g`` are the factor blocks of homogeneous coordinates.
Its *local potential* in a chart is the same expression without the
reference term, evaluated at the chart representative; it equals
``rho + phi`` with ``rho`` the Fubini-Study potential of the class.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import geometry as geo
from .geometry import KClass, ProjPoint
from .poly import GaussQ, SparsePoly, as_exact, format_rational, is_exact

NEG_INF = float("-inf")


@dataclass(frozen=True, eq=False)
class LogNormPotential:
    space: str
    components: tuple[SparsePoly, ...]
    scale: Fraction
    ref_weights: tuple[Fraction, ...]
    log_terms: tuple[tuple[Fraction, SparsePoly], ...] = ()
    poles: tuple[ProjPoint, ...] | None = None
    name: str = ""

    def __post_init__(self):
        sizes = geo.factor_sizes(self.space)
        nv = sum(sizes)
        comps = tuple(c.with_grading(sizes) if c.grading != sizes else c for c in self.components)
        if not comps:
            raise ValueError("need at least one component")
        degs = {c.degree for c in comps if not c.is_zero()}
        if len(degs) != 1:
            raise ValueError(f"components must share one (bi)degree, got {sorted(degs)}")
        if any(c.nvars != nv for c in comps):
            raise ValueError("component variable count does not match the space")
        terms = tuple((Fraction(w), p.with_grading(sizes) if p.grading != sizes else p) for w, p in self.log_terms if Fraction(w) != 0)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "log_terms", terms)
        object.__setattr__(self, "scale", Fraction(self.scale))
        object.__setattr__(self, "ref_weights", tuple(Fraction(w) for w in self.ref_weights))
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if len(self.ref_weights) != len(sizes):
            raise ValueError("one reference weight per factor")
        hom = self.homogeneity()
        if hom != self.ref_weights:
            raise ValueError(f"numerator homogeneity {tuple(map(str, hom))} != reference weights {tuple(map(str, self.ref_weights))}")

    # -- structure -----------------------------------------------------
    @property
    def degree(self) -> tuple[int, ...]:
        return next(c.degree for c in self.components if not c.is_zero())

    def homogeneity(self) -> tuple[Fraction, ...]:
        deg = self.degree
        out = [self.scale * d for d in deg]
        for w, p in self.log_terms:
            for g, d in enumerate(p.degree):
                out[g] += w * d
        return tuple(out)

    @property
    def kclass(self) -> KClass:
        return KClass(self.space, self.ref_weights)

    # -- evaluation ----------------------------------------------------
    def _numerator(self, H: Sequence[np.ndarray]) -> np.ndarray:
        vals = np.stack([c.eval(H) for c in self.components])
        out = float(self.scale) * geo._log_norm(vals)
        for w, p in self.log_terms:
            with np.errstate(divide="ignore"):
                out = out + float(w) * np.log(np.abs(p.eval(H)))
        return out

    def _normalized(self, H):
        """Scale each factor block so its largest coordinate has modulus 1."""
        out, k = [], 0
        for s in geo.factor_sizes(self.space):
            block = np.stack([np.asarray(h, dtype=complex) for h in H[k : k + s]])
            m = np.max(np.abs(block), axis=0)
            out.extend(block / m)
            k += s
        return out

    def eval_homogeneous(self, H: Sequence[np.ndarray]) -> np.ndarray:
        H = self._normalized(H)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self._numerator(H) - geo.reference_log_norm(self.space, self.ref_weights, H)
        return np.where(np.isnan(v), NEG_INF, v)

    def eval_affine(self, chart: int, Z) -> np.ndarray:
        """Values of the global function at an array of affine points of ``chart``."""
        return self.eval_homogeneous(geo.homogeneous_from_affine(self.space, chart, Z))

    def local(self, chart: int, Z) -> np.ndarray:
        """Local potential ``rho + phi`` in ``chart``."""
        H = geo.homogeneous_from_affine(self.space, chart, Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self._numerator(H)
        return np.where(np.isnan(v), NEG_INF, v)

    def __call__(self, p: ProjPoint) -> float:
        return eval_potential(self, p)

    # -- serialization -------------------------------------------------
    def to_json(self) -> dict:
        return {
            "space": self.space,
            "scale_num": self.scale.numerator,
            "scale_den": self.scale.denominator,
            "ref_weights": [format_rational(w) for w in self.ref_weights],
            "components": [c.to_json() for c in self.components],
            "monomial_terms": [{"weight": format_rational(w), "terms": p.to_json()} for w, p in self.log_terms],
            "name": self.name,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, doc: dict) -> "LogNormPotential":
        space = doc["space"]
        sizes = geo.factor_sizes(space)
        nv = sum(sizes)
        scale = Fraction(int(doc.get("scale_num", 1)), int(doc["scale_den"]))
        comps = tuple(SparsePoly.from_json(nv, c, grading=sizes) for c in doc["components"])
        terms = tuple(
            (Fraction(str(t["weight"])), SparsePoly.from_json(nv, t["terms"], grading=sizes)) for t in doc.get("monomial_terms", [])
        )
        refs = tuple(Fraction(str(w)) for w in doc["ref_weights"])
        return cls(space, comps, scale, refs, terms, name=doc.get("name", ""))


def eval_potential(phi: LogNormPotential, p: ProjPoint) -> float:
    """Value of ``phi`` at ``p``; exact arithmetic up to the final logarithm for exact points."""
    if p.space != phi.space:
        raise ValueError(f"space mismatch: potential on {phi.space}, point on {p.space}")
    if not p.is_exact:
        H = [np.array(c) for c in p.flat]
        return float(phi.eval_homogeneous(H))
    flat = [as_exact(c) for c in p.flat]
    vals = [c.eval_exact(flat) for c in phi.components]
    if all(not v for v in vals):
        return NEG_INF
    total = sum((_norm2(v) for v in vals), Fraction(0))
    out = float(phi.scale) * 0.5 * _log_fraction(total)
    for w, poly in phi.log_terms:
        v = poly.eval_exact(flat)
        if not v:
            if w > 0:
                return NEG_INF
            return float("inf")
        out += float(w) * 0.5 * _log_fraction(_norm2(v))
    k = 0
    for s, w in zip(geo.factor_sizes(phi.space), phi.ref_weights):
        n2 = sum((_norm2(c) for c in flat[k : k + s]), Fraction(0))
        out -= float(w) * 0.5 * _log_fraction(n2)
        k += s
    return out


def _norm2(v) -> Fraction:
    if isinstance(v, GaussQ):
        return v.norm2()
    return Fraction(v) ** 2


def _log_fraction(x: Fraction) -> float:
    x = Fraction(x)
    return math.log(x.numerator) - math.log(x.denominator)


# -- exact Lelong numbers -------------------------------------------------


def vanishing_order(poly: SparsePoly, space: str, p: ProjPoint) -> int | float:
    """Order of vanishing of a (bi)homogeneous polynomial at ``p`` (inf for the zero polynomial)."""
    if not p.is_exact:
        raise ValueError("point is not exactly representable (need Gaussian-rational coordinates)")
    chart = p.exact_chart()
    a = p.affine_exact(chart)
    idx = geo.chart_indices(space, chart)
    nv = poly.nvars
    subs, k, off = [], 0, 0
    for s, i in zip(geo.factor_sizes(space), idx):
        for j in range(s):
            v = off + j
            if j == i:
                subs.append(SparsePoly.constant(1, nv))
            else:
                shift = a[k]
                k += 1
                x = SparsePoly.var(v, nv)
                subs.append(x + shift if shift else x)
        off += s
    local = poly.compose(subs)
    d = local.min_degree()
    return math.inf if d is None else d


def lelong_exact(phi: LogNormPotential, p: ProjPoint) -> Fraction:
    """Lelong number of ``phi`` at ``p``: scale * min_i ord_p(F_i) + sum_k w_k ord_p(M_k)."""
    if p.space != phi.space:
        raise ValueError("space mismatch")
    orders = [vanishing_order(c, phi.space, p) for c in phi.components]
    m = min(orders)
    if m == math.inf:
        raise ValueError("all components vanish identically")
    nu = phi.scale * int(m)
    for w, poly in phi.log_terms:
        o = vanishing_order(poly, phi.space, p)
        if o == math.inf:
            raise ValueError("log term vanishes identically")
        nu += w * int(o)
    return nu


# -- exact linear algebra helpers ---------------------------------------


def _det(rows: list[list]) -> object:
    """Determinant over the Gaussian rationals by Gaussian elimination."""
    m = [[as_exact(x) for x in r] for r in rows]
    n = len(m)
    det: object = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        pv = m[c][c]
        det = det * pv
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] / pv
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return det


def _rank(rows: list[list]) -> int:
    m = [[as_exact(x) for x in r] for r in rows]
    rank, col = 0, 0
    nrows, ncols = len(m), len(m[0]) if m else 0
    while rank < nrows and col < ncols:
        piv = next((r for r in range(rank, nrows) if m[r][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(rank + 1, nrows):
            if m[r][col]:
                f = m[r][col] / m[rank][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
        col += 1
    return rank


def binary_form(poly: SparsePoly, A: Sequence, B: Sequence) -> list:
    """Coefficients (in s^d, s^(d-1) t, ..., t^d) of ``poly(s*A + t*B)``."""
    nv = poly.nvars
    s = SparsePoly.var(0, 2)
    t = SparsePoly.var(1, 2)
    restricted = poly.compose([s * A[i] + t * B[i] for i in range(nv)])
    d = sum(poly.degree) if isinstance(poly.degree, tuple) else poly.degree
    return [restricted.terms.get((d - i, i), 0) for i in range(d + 1)]


def sylvester_resultant(f: list, g: list) -> object:
    """Resultant of two binary forms given by full coefficient lists."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    if size == 0:
        return 1
    rows = []
    for i in range(n):
        rows.append([0] * i + list(f) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(g) + [0] * (size - n - 1 - i))
    return _det(rows)


def finiteness_certificate(P1: SparsePoly, P2: SparsePoly, tries: int = 4, seed: int = 0) -> bool:
    """True when P1, P2 restricted to some random line have nonzero resultant."""
    rng = random.Random(seed)
    for _ in range(tries):
        A = [rng.randint(-9, 9) for _ in range(3)]
        B = [rng.randint(-9, 9) for _ in range(3)]
        if _rank([A, B]) < 2:
            continue
        if sylvester_resultant(binary_form(P1, A, B), binary_form(P2, A, B)):
            return True
    return False


# -- indeterminacy sets -------------------------------------------------


def _to_sympy(poly: SparsePoly, syms):
    import sympy

    expr = 0
    for e, c in poly.terms.items():
        cc = sympy.Rational(GaussQ(*GaussQ._parts(c)).re) + sympy.I * sympy.Rational(GaussQ(*GaussQ._parts(c)).im)
        term = cc
        for s, k in zip(syms, e):
            term *= s**k
        expr += term
    return sympy.expand(expr)


def _sympy_number(v):
    import sympy

    v = sympy.nsimplify(v)
    re, im = sympy.re(v), sympy.im(v)
    if re.is_Rational and im.is_Rational:
        return as_exact(GaussQ(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q))))
    return complex(sympy.N(v, 30))


def common_zeros_p2(P1: SparsePoly, P2: SparsePoly) -> list[ProjPoint]:
    """Common zeros of two forms on P^2 (finite case), exact when the points are Gaussian-rational."""
    import sympy

    z0, z1, z2 = sympy.symbols("z0 z1 z2")
    f, g = _to_sympy(P1, (z0, z1, z2)), _to_sympy(P2, (z0, z1, z2))
    pts: list[ProjPoint] = []
    for sol in sympy.solve([f.subs(z0, 1), g.subs(z0, 1)], [z1, z2], dict=True):
        if len(sol) == 2:
            pts.append(ProjPoint("P2", ((1, _sympy_number(sol[z1]), _sympy_number(sol[z2])),)))
    # line at infinity z0 = 0: chart z1 = 1, then the point [0:0:1]
    for sol in sympy.solve([f.subs({z0: 0, z1: 1}), g.subs({z0: 0, z1: 1})], [z2], dict=True):
        if len(sol) == 1:
            pts.append(ProjPoint("P2", ((0, 1, _sympy_number(sol[z2])),)))
    if f.subs({z0: 0, z1: 0, z2: 1}) == 0 and g.subs({z0: 0, z1: 0, z2: 1}) == 0:
        pts.append(ProjPoint("P2", ((0, 0, 1),)))
    return pts


def zeros_p1(P: SparsePoly) -> list[ProjPoint]:
    import sympy

    z0, z1 = sympy.symbols("z0 z1")
    f = _to_sympy(P, (z0, z1))
    pts = [ProjPoint("P1", ((1, _sympy_number(r)),)) for r in sympy.roots(sympy.Poly(f.subs(z0, 1), z1)).keys()]
    if f.subs({z0: 0, z1: 1}) == 0:
        pts.append(ProjPoint("P1", ((0, 1),)))
    return pts


# -- constructors --------------------------------------------------------


def _p2_vars():
    return [SparsePoly.var(i, 3, grading=(3,)) for i in range(3)]


def make_rational_green(F: Sequence[SparsePoly], space: str = "P2", poles: Sequence[ProjPoint] | None = None, name: str = "") -> LogNormPotential:
    """Green function ``(1/d) log||F|| - log||z||`` of a rational map with finite indeterminacy set."""
    n = geo.complex_dim(space)
    if space == "P1xP1":
        raise ValueError("rational Green functions are built on P^n")
    sizes = geo.factor_sizes(space)
    F = [p.with_grading(sizes) for p in F]
    if len(F) != n:
        raise ValueError(f"need {n} components on {space}, got {len(F)}")
    degs = {p.degree for p in F}
    if len(degs) != 1:
        raise ValueError(f"degree mismatch among components: {sorted(degs)}")
    (d,) = degs.pop()
    if d < 1:
        raise ValueError("components must have positive degree")
    if space == "P2" and not finiteness_certificate(F[0], F[1]):
        raise ValueError("finiteness certificate failed: the components share a curve (positive-dimensional indeterminacy)")
    if poles is None and d <= 2:
        if space == "P2":
            if d == 1:
                a = [F[0].terms.get(e, 0) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
                b = [F[1].terms.get(e, 0) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))]
                cross = (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])
                poles = [ProjPoint("P2", (cross,))]
            else:
                poles = common_zeros_p2(F[0], F[1])
        else:
            poles = zeros_p1(F[0])
    return LogNormPotential(space, tuple(F), Fraction(1, d), (Fraction(1),), poles=tuple(poles) if poles is not None else None, name=name or "rational_green")


def make_cusp_green(n: int, k: int) -> LogNormPotential:
    """``(1/n) log||(y^k t^(n-k) - x^n, y^n)|| - log||(t,x,y)||`` with its pole at [1:0:0]."""
    if not (1 <= k < n):
        raise ValueError("cusp family needs 1 <= k < n")
    t, x, y = _p2_vars()
    comps = (y**k * t ** (n - k) - x**n, y**n)
    return LogNormPotential(
        "P2", tuple(c.with_grading((3,)) for c in comps), Fraction(1, n), (Fraction(1),), poles=(ProjPoint.of("P2", 1, 0, 0),), name=f"cusp({n},{k})"
    )


def make_hyperplane_avg(lines: Sequence[SparsePoly]) -> LogNormPotential:
    """``(1/(n+1)) log|l_1 ... l_(n+1)| - log||z||`` for hyperplanes in general position."""
    if not lines:
        raise ValueError("need linear forms")
    nv = lines[0].nvars
    space = {2: "P1", 3: "P2"}.get(nv)
    if space is None or len(lines) != nv:
        raise ValueError("need n+1 linear forms on P^n (n = 1 or 2)")
    n = nv - 1
    rows = []
    for ell in lines:
        ell = ell.with_grading((nv,))
        if ell.degree != (1,):
            raise ValueError("hyperplanes must be linear forms")
        rows.append([ell.terms.get(tuple(int(i == j) for i in range(nv)), 0) for j in range(nv)])
    for subset in itertools.combinations(rows, n):
        if _rank(list(subset)) < n:
            raise ValueError("linear forms are not in general position")
    prod = lines[0]
    for ell in lines[1:]:
        prod = prod * ell
    return LogNormPotential(space, (prod.with_grading((nv,)),), Fraction(1, n + 1), (Fraction(1),), name="hyperplane_avg")


def coordinate_hyperplanes(space: str = "P2") -> list[SparsePoly]:
    nv = geo.factor_sizes(space)[0]
    return [SparsePoly.var(i, nv, grading=(nv,)) for i in range(nv)]


def make_rab(a, b, p: ProjPoint | None = None) -> LogNormPotential:
    """Potential of class (a, b) on P^1 x P^1 with an isotropic pole of Lelong number min(a, b) at ``p``."""
    a, b = Fraction(a), Fraction(b)
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if p is None:
        p = ProjPoint.of("P1xP1", (1, 0), (1, 0))
    if p.space != "P1xP1":
        raise ValueError("pole must lie on P1xP1")
    if not p.is_exact:
        raise ValueError("pole needs Gaussian-rational coordinates")
    (p0, p1), (q0, q1) = [[GaussQ(*GaussQ._parts(as_exact(c))) for c in f] for f in p.coords]
    g = (2, 2)
    z0, z1, w0, w1 = [SparsePoly.var(i, 4) for i in range(4)]
    lz = z1 * p0 - z0 * p1
    lw = w1 * q0 - w0 * q1
    mz = z0 * p0.conjugate() + z1 * p1.conjugate()
    mw = w0 * q0.conjugate() + w1 * q1.conjugate()
    m = min(a, b)
    comps = ((lz * mw).with_grading(g), (lw * mz).with_grading(g))
    terms = ((a - m, mz.with_grading(g)), (b - m, mw.with_grading(g)))
    return LogNormPotential("P1xP1", comps, m, (a, b), terms, poles=(p,), name=f"rab({a},{b})")


def _check_greenp1_q(n: int, m: int, k: int, Q: SparsePoly) -> SparsePoly:
    if not (1 <= n <= m) or k < 1:
        raise ValueError("need 1 <= n <= m and k >= 1")
    Q = Q.with_grading((3,))
    want = (m + n) * k - 2
    if Q.is_zero():
        return Q
    if Q.degree != (want,):
        raise ValueError(f"Q must be homogeneous of degree {want}")
    if Q.degree_in(1) > n * k - 1 or Q.degree_in(2) > m * k - 1:
        raise ValueError(f"Q violates deg_t1 <= {n * k - 1} or deg_t2 <= {m * k - 1}")
    return Q


def greenp1_plane_components(n: int, m: int, k: int, Q: SparsePoly) -> tuple[SparsePoly, SparsePoly]:
    """The pair (P_1, P_2) on P^2 whose Green function yields the P^1 x P^1 family."""
    Q = _check_greenp1_q(n, m, k, Q)
    t0, t1, t2 = _p2_vars()
    P1 = t1 ** (n * k) * t2 ** (m * k)
    P2 = t1 ** (n * k) * t0 ** (m * k) + t2 ** (m * k) * t0 ** (n * k) + t1 * t2 * Q
    return P1.with_grading((3,)), P2.with_grading((3,))


def make_greenp1_plane(n: int, m: int, k: int, Q: SparsePoly) -> LogNormPotential:
    """Potential of ``(1+b)(omega + dd^c g_f)`` on P^2, b = m/n (global function ``(1+b) g_f``)."""
    P1, P2 = greenp1_plane_components(n, m, k, Q)
    b = Fraction(m, n)
    d = (m + n) * k
    poles = (ProjPoint.of("P2", 1, 0, 0), ProjPoint.of("P2", 0, 1, 0), ProjPoint.of("P2", 0, 0, 1))
    return LogNormPotential("P2", (P1, P2), (1 + b) / d, (1 + b,), poles=poles, name=f"greenp1_plane({n},{m},{k})")


def make_greenp1_family(n: int, m: int, k: int, Q: SparsePoly) -> LogNormPotential:
    """Bihomogeneous potential of class (1, m/n) on P^1 x P^1 with a single pole at ((1:0),(1:0))."""
    Q = _check_greenp1_q(n, m, k, Q)
    nk, mk = n * k, m * k
    g = (2, 2)
    z0, z1, w0, w1 = [SparsePoly.var(i, 4) for i in range(4)]
    P1 = z1**nk * w1**mk
    qhat = {}
    for (a0, i1, i2), c in Q.terms.items():
        qhat[(nk - 1 - i1, i1, mk - 1 - i2, i2)] = c
    P2 = z1**nk * w0**mk + z0**nk * w1**mk + z1 * w1 * SparsePoly(4, qhat)
    pole = ProjPoint.of("P1xP1", (1, 0), (1, 0))
    return LogNormPotential(
        "P1xP1", (P1.with_grading(g), P2.with_grading(g)), Fraction(1, nk), (Fraction(1), Fraction(m, n)), poles=(pole,), name=f"greenp1({n},{m},{k})"
    )


# -- the birational transfer between P^1 x P^1 and P^2 ---------------------


def phi_forward(phi: LogNormPotential) -> LogNormPotential:
    """Pull a P^1 x P^1 potential back to P^2 via (z0,z1,w0,w1) = (t0,t1,t0,t2)."""
    if phi.space != "P1xP1":
        raise ValueError("forward transfer needs a P1xP1 potential")
    t0, t1, t2 = [SparsePoly.var(i, 3) for i in range(3)]
    subs = [t0, t1, t0, t2]
    comps = tuple(c.compose(subs, grading=(3,)) for c in phi.components)
    terms = tuple((w, p.compose(subs, grading=(3,))) for w, p in phi.log_terms)
    poles = None
    if phi.poles is not None:
        poles = tuple(_phi_inverse_point(p) for p in phi.poles)
    return LogNormPotential("P2", comps, phi.scale, (sum(phi.ref_weights),), terms, poles=poles, name=f"forward({phi.name})")


def _phi_inverse_point(p: ProjPoint) -> ProjPoint:
    (z0, z1), (w0, w1) = p.coords
    return ProjPoint("P2", ((z0 * w0, z1 * w0, w1 * z0),))


def phi_inverse(phi: LogNormPotential, target_weights: Sequence | None = None) -> LogNormPotential:
    """Push a P^2 potential to P^1 x P^1 via t = (z0 w0, z1 w0, w1 z0), cancelling the monomial factor.

    ``target_weights`` defaults to ``(1, c - 1)`` where ``c`` is the reference weight on P^2.
    Raises ``ValueError`` when the factor z0^* w0^* demanded by the target class does not
    divide the substituted numerator exactly (the current would charge a blown-down line).
    """
    if phi.space != "P2":
        raise ValueError("inverse transfer needs a P2 potential")
    (c,) = phi.ref_weights
    a_t, b_t = (Fraction(1), c - 1) if target_weights is None else tuple(Fraction(x) for x in target_weights)
    if a_t < 0 or b_t < 0:
        raise ValueError("target class must have non-negative weights")
    need_z0, need_w0 = c - a_t, c - b_t
    z0, z1, w0, w1 = [SparsePoly.var(i, 4) for i in range(4)]
    subs = [z0 * w0, z1 * w0, w1 * z0]
    comps = [p.compose(subs) for p in phi.components]
    terms = [(w, p.compose(subs)) for w, p in phi.log_terms]

    def content(polys):
        cs = [p.monomial_content() for p in polys if not p.is_zero()]
        return tuple(min(x[i] for x in cs) for i in range(4))

    cc = content(comps)
    have_z0 = phi.scale * cc[0]
    have_w0 = phi.scale * cc[2]
    new_terms = []
    for w, p in terms:
        tc = p.monomial_content()
        have_z0 += w * tc[0]
        have_w0 += w * tc[2]
        new_terms.append((w, p.divide_monomial((tc[0], 0, tc[2], 0))))
    if cc[1] or cc[3]:
        raise ValueError("numerator acquires a factor z1 or w1; not a pull-back of a P^2 current")
    if have_z0 != need_z0 or have_w0 != need_w0:
        raise ValueError(
            f"monomial factor z0^{have_z0} w0^{have_w0} (in weight) does not match the demanded "
            f"z0^{need_z0} w0^{need_w0}: the current charges a blown-down line"
        )
    comps = [p.divide_monomial((cc[0], 0, cc[2], 0)).with_grading((2, 2)) for p in comps]
    poles = None
    if phi.poles is not None:
        poles = tuple(ProjPoint("P1xP1", ((p.coords[0][0], p.coords[0][1]), (p.coords[0][0], p.coords[0][2]))) for p in phi.poles if p.coords[0][0])
    return LogNormPotential("P1xP1", tuple(comps), phi.scale, (a_t, b_t), tuple((w, p.with_grading((2, 2))) for w, p in new_terms), poles=poles, name=f"inverse({phi.name})")


# -- auxiliary evaluable potentials ---------------------------------------


@dataclass(frozen=True)
class ZeroPotential:
    """The function 0 relative to the class ``kclass`` (its local potential is the FS potential)."""

    kclass: KClass
    name: str = "zero"
    poles: tuple = ()

    @property
    def space(self) -> str:
        return self.kclass.space

    def eval_affine(self, chart, Z):
        Z = np.asarray(Z, dtype=complex)
        return np.zeros(Z.shape[:-1])

    def local(self, chart, Z):
        return geo.fs_potential(self.kclass, chart, Z)


@dataclass(frozen=True)
class FSPotential:
    """A Fubini-Study local potential viewed as a smooth function on one chart (for diagnostics)."""

    kclass: KClass
    name: str = "fs"

    @property
    def space(self) -> str:
        return self.kclass.space

    def eval_affine(self, chart, Z):
        return geo.fs_potential(self.kclass, chart, Z)


def local_potential(pot, kclass: KClass, chart: int, Z) -> np.ndarray:
    """``rho + phi`` in ``chart`` for any evaluable potential."""
    if hasattr(pot, "local"):
        return pot.local(chart, Z)
    return geo.fs_potential(kclass, chart, Z) + pot.eval_affine(chart, Z)


def scaled(pot, c: float):
    """``c * pot`` for Lelong-scaling checks."""
    return _Scaled(pot, float(c))


@dataclass(frozen=True)
class _Scaled:
    base: object
    c: float

    @property
    def space(self):
        return self.base.space

    def eval_affine(self, chart, Z):
        return self.c * self.base.eval_affine(chart, Z)
