"""Exact sparse polynomials over the Gaussian rationals.

Coefficients live in the tower ``int`` < ``Fraction`` < :class:`GaussQ`;
arithmetic stays in the smallest type that holds the result, so integer
polynomials (the dynamics module composes large ones) never pay for
complex bookkeeping.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["GaussQ", "SparsePoly", "as_exact", "is_exact", "parse_rational", "format_rational"]


class GaussQ:
    """Gaussian rational ``re + i*im`` with ``Fraction`` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    # -- coercion -------------------------------------------------------
    @staticmethod
    def _parts(x):
        if isinstance(x, GaussQ):
            return x.re, x.im
        if isinstance(x, (int, Fraction)):
            return Fraction(x), Fraction(0)
        if isinstance(x, Rational):
            return Fraction(x.numerator, x.denominator), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return _simplify(GaussQ(self.re + p[0], self.im + p[1]))

    __radd__ = __add__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return _simplify(GaussQ(self.re - p[0], self.im - p[1]))

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return _simplify(GaussQ(p[0] - self.re, p[1] - self.im))

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = self.re, self.im
        c, d = p
        return _simplify(GaussQ(a * c - b * d, a * d + b * c))

    __rmul__ = __mul__

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        c, d = p
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        a, b = self.re, self.im
        return _simplify(GaussQ((a * c + b * d) / den, (b * c - a * d) / den))

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return GaussQ(*p) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (1 / self) ** (-n)
        out: object = 1
        base: object = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return GaussQ(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


def _simplify(z):
    if isinstance(z, GaussQ) and z.im == 0:
        r = z.re
        return r.numerator if r.denominator == 1 else r
    return z


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, GaussQ)) and not isinstance(x, bool)


def as_exact(x):
    """Coerce ``x`` into the exact tower. Floats are converted only when integral."""
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, (int, Fraction)):
        return _simplify(GaussQ(x)) if isinstance(x, Fraction) else x
    if isinstance(x, GaussQ):
        return _simplify(x)
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, (float, complex, np.floating, np.complexfloating)):
        z = complex(x)
        if z.real.is_integer() and z.imag.is_integer():
            return _simplify(GaussQ(int(z.real), int(z.imag)))
    raise ValueError(f"{x!r} is not exactly representable as a Gaussian rational")


def parse_rational(s: str):
    s = s.strip()
    if "i" in s:
        raise ValueError("use separate re/im fields for complex coefficients")
    f = Fraction(s)
    return f.numerator if f.denominator == 1 else f


def format_rational(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _real_part(c) -> Fraction:
    return c.re if isinstance(c, GaussQ) else Fraction(c)


def _imag_part(c) -> Fraction:
    return c.im if isinstance(c, GaussQ) else Fraction(0)


class SparsePoly:
    """Polynomial stored as ``{exponent tuple: coefficient}``.

    ``grading`` optionally splits the variables into groups (``(3,)`` for
    homogeneous coordinates on P^2, ``(2, 2)`` for P^1 x P^1). A graded
    polynomial must be homogeneous in each group; the per-group degree
    is then available as :attr:`degree`.
    """

    __slots__ = ("nvars", "terms", "grading", "_degree")

    def __init__(
        self,
        nvars: int,
        terms: Mapping[Sequence[int], object] | Iterable[tuple[Sequence[int], object]] = (),
        grading: Sequence[int] | None = None,
        degree: Sequence[int] | int | None = None,
    ):
        self.nvars = int(nvars)
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean: dict[tuple[int, ...], object] = {}
        for exps, c in items:
            e = tuple(int(k) for k in exps)
            if len(e) != self.nvars or min(e, default=0) < 0:
                raise ValueError(f"bad exponent vector {exps!r} for {self.nvars} variables")
            c = as_exact(c)
            if e in clean:
                c = clean[e] + c
            if c:
                clean[e] = c
            else:
                clean.pop(e, None)
        self.terms = clean
        self.grading = tuple(grading) if grading is not None else None
        if self.grading is not None and sum(self.grading) != self.nvars:
            raise ValueError("grading does not partition the variables")
        self._degree = self._check_degree(degree)

    # -- constructors ---------------------------------------------------
    @classmethod
    def _raw(cls, nvars, terms, grading=None):
        p = cls.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p.grading = grading
        p._degree = None
        return p

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff=1, grading=None) -> "SparsePoly":
        return cls(len(exps), {tuple(exps): coeff}, grading=grading)

    @classmethod
    def var(cls, i: int, nvars: int, grading=None) -> "SparsePoly":
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1}, grading=grading)

    @classmethod
    def constant(cls, c, nvars: int) -> "SparsePoly":
        return cls(nvars, {(0,) * nvars: c})

    def _check_degree(self, declared):
        if self.grading is None:
            return None
        degs = None
        for e in self.terms:
            d = self._group_degrees(e)
            if degs is None:
                degs = d
            elif d != degs:
                raise ValueError(f"polynomial is not homogeneous for grading {self.grading}: {degs} vs {d}")
        if declared is not None:
            dec = (declared,) if isinstance(declared, int) else tuple(declared)
            if degs is not None and dec != degs:
                raise ValueError(f"declared degree {dec} but terms have degree {degs}")
            degs = dec
        return degs

    def _group_degrees(self, e):
        out, k = [], 0
        for g in self.grading:
            out.append(sum(e[k : k + g]))
            k += g
        return tuple(out)

    def with_grading(self, grading, degree=None) -> "SparsePoly":
        return SparsePoly(self.nvars, self.terms, grading=grading, degree=degree)

    # -- inspection -----------------------------------------------------
    @property
    def degree(self):
        """Per-group degree tuple for graded polys, total degree otherwise."""
        if self.grading is not None:
            return self._degree
        return self.total_degree()

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def min_degree(self) -> int | None:
        """Smallest total degree of a surviving monomial (None for the zero polynomial)."""
        return min((sum(e) for e in self.terms), default=None)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.terms.values())

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, SparsePoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if is_exact(other) or isinstance(other, int):
            return self == SparsePoly.constant(other, self.nvars)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "SparsePoly(0)"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(e) if k)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return "SparsePoly(" + " + ".join(parts) + ")"

    # -- arithmetic -----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, SparsePoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return SparsePoly.constant(other, self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return SparsePoly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly._raw(self.nvars, {e: -c for e, c in self.terms.items()}, self.grading)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SparsePoly):
            c = as_exact(other)
            if not c:
                return SparsePoly._raw(self.nvars, {})
            return SparsePoly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        a, b = (self.terms, other.terms) if len(self.terms) <= len(other.terms) else (other.terms, self.terms)
        out: dict = {}
        get = out.get
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                out[e] = get(e, 0) + c1 * c2
        return SparsePoly._raw(self.nvars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = SparsePoly.constant(1, self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c) -> "SparsePoly":
        return SparsePoly._raw(self.nvars, {e: v * as_exact(c) for e, v in self.terms.items()}, self.grading) if as_exact(c) else SparsePoly._raw(self.nvars, {}, self.grading)

    # -- substitution and evaluation -------------------------------------
    def compose(self, polys: Sequence["SparsePoly"], grading=None) -> "SparsePoly":
        """Substitute ``polys[i]`` for variable ``i``."""
        if len(polys) != self.nvars:
            raise ValueError("need one polynomial per variable")
        nv = polys[0].nvars
        cache: list[dict[int, SparsePoly]] = [{0: SparsePoly.constant(1, nv), 1: p} for p in polys]

        def power(i, k):
            c = cache[i]
            if k not in c:
                half = power(i, k // 2)
                c[k] = half * half * c[1] if k % 2 else half * half
            return c[k]

        out: dict = {}
        for e, coef in self.terms.items():
            term = None
            for i, k in enumerate(e):
                if k:
                    p = power(i, k)
                    term = p if term is None else term * p
            if term is None:
                term = SparsePoly.constant(1, nv)
            for e2, c2 in term.terms.items():
                v = out.get(e2, 0) + coef * c2
                out[e2] = v
        res = {e: c for e, c in out.items() if c}
        return SparsePoly(nv, res, grading=grading) if grading is not None else SparsePoly._raw(nv, res)

    def translate(self, shift: Sequence) -> "SparsePoly":
        """Return ``p(x + shift)`` exactly."""
        nv = self.nvars
        polys = [SparsePoly.var(i, nv) + as_exact(s) if as_exact(s) else SparsePoly.var(i, nv) for i, s in enumerate(shift)]
        return self.compose(polys)

    def substitute(self, values: Mapping[int, object]) -> "SparsePoly":
        """Fix some variables at exact values; the variable count is kept."""
        out: dict = {}
        vals = {i: as_exact(v) for i, v in values.items()}
        for e, c in self.terms.items():
            coef = c
            e2 = list(e)
            for i, v in vals.items():
                if e[i]:
                    coef = coef * v ** e[i]
                    e2[i] = 0
            if coef:
                t = tuple(e2)
                out[t] = out.get(t, 0) + coef
        return SparsePoly._raw(self.nvars, {e: c for e, c in out.items() if c})

    def eval_exact(self, point: Sequence):
        pt = [as_exact(v) for v in point]
        total = 0
        for e, c in self.terms.items():
            t = c
            for v, k in zip(pt, e):
                if k:
                    t = t * v**k
            total = total + t
        return total

    def eval(self, coords: Sequence) -> np.ndarray:
        """Floating-point evaluation on broadcastable complex arrays."""
        if not self.terms:
            return np.zeros(np.broadcast(*[np.asarray(c) for c in coords]).shape, complex)
        arrs = [np.asarray(c, dtype=complex) for c in coords]
        shape = np.broadcast(*arrs).shape
        maxdeg = [self.degree_in(i) for i in range(self.nvars)]
        powers = []
        for a, m in zip(arrs, maxdeg):
            pw = [None] * (m + 1) if m >= 0 else []
            if m >= 1:
                pw[1] = a
                for k in range(2, m + 1):
                    pw[k] = pw[k - 1] * a
            powers.append(pw)
        out = np.zeros(shape, complex)
        for e, c in self.terms.items():
            term = complex(c)
            t = None
            for i, k in enumerate(e):
                if k:
                    t = powers[i][k] if t is None else t * powers[i][k]
            out += term if t is None else term * t
        return out

    def partial(self, i: int) -> "SparsePoly":
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = list(e)
                e2[i] -= 1
                out[tuple(e2)] = c * e[i]
        return SparsePoly._raw(self.nvars, out)

    def monomial_content(self) -> tuple[int, ...]:
        """Largest monomial dividing every term (exponentwise minimum)."""
        if not self.terms:
            return (0,) * self.nvars
        return tuple(min(e[i] for e in self.terms) for i in range(self.nvars))

    def divide_monomial(self, exps: Sequence[int]) -> "SparsePoly":
        out = {}
        for e, c in self.terms.items():
            e2 = tuple(a - b for a, b in zip(e, exps))
            if min(e2) < 0:
                raise ValueError("monomial does not divide polynomial")
            out[e2] = c
        return SparsePoly._raw(self.nvars, out)

    def coeff_float_norm(self) -> float:
        return math.fsum(abs(complex(c)) for c in self.terms.values())

    # -- serialization ---------------------------------------------------
    def to_json(self) -> list[dict]:
        return [
            {"exponents": list(e), "re": format_rational(_real_part(c)), "im": format_rational(_imag_part(c))}
            for e, c in sorted(self.terms.items(), reverse=True)
        ]

    @classmethod
    def from_json(cls, nvars: int, items: list[dict], grading=None) -> "SparsePoly":
        terms = []
        for it in items:
            re = Fraction(str(it.get("re", "0")))
            im = Fraction(str(it.get("im", "0")))
            terms.append((it["exponents"], GaussQ(re, im)))
        return cls(nvars, terms, grading=grading)


def parse_poly(expr: str, names: Sequence[str], grading=None) -> SparsePoly:
    """Polynomial from an expression string such as ``"z1^2 - z0^2"`` (``I`` is the imaginary unit)."""
    import sympy

    syms = sympy.symbols(list(names))
    local = dict(zip(names, syms))
    try:
        e = sympy.sympify(expr.replace("^", "**"), locals=local)
        poly = sympy.Poly(sympy.expand(e), *syms)
    except (sympy.SympifyError, sympy.PolynomialError, TypeError, SyntaxError) as err:
        raise ValueError(f"cannot parse polynomial {expr!r}: {err}") from None
    terms = {}
    for exps, c in poly.terms():
        re, im = sympy.re(c), sympy.im(c)
        if not (re.is_Rational and im.is_Rational):
            raise ValueError(f"coefficient {c} is not a Gaussian rational")
        terms[exps] = GaussQ(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
    return SparsePoly(len(names), terms, grading=grading)
