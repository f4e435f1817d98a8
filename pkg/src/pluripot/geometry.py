"""Projective points, affine charts, Fubini-Study potentials and class bookkeeping.

Spaces are tagged ``"P1"``, ``"P2"`` or ``"P1xP1"``. Charts are the standard
affine charts: on P^n chart ``i`` sets ``z_i = 1`` and keeps the remaining
coordinates in order; on P^1 x P^1 chart ``2*i + j`` sets ``z_i = 1`` and
``w_j = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .poly import GaussQ, as_exact, is_exact

SPACES = {"P1": (2,), "P2": (3,), "P1xP1": (2, 2)}
EQ_TOL = 1e-12


def factor_sizes(space: str) -> tuple[int, ...]:
    try:
        return SPACES[space]
    except KeyError:
        raise ValueError(f"unknown space {space!r}; expected one of {sorted(SPACES)}") from None


def complex_dim(space: str) -> int:
    return sum(k - 1 for k in factor_sizes(space))


def n_charts(space: str) -> int:
    return math.prod(factor_sizes(space))


def chart_indices(space: str, chart: int) -> tuple[int, ...]:
    """Per-factor index of the coordinate normalised to 1 in ``chart``."""
    sizes = factor_sizes(space)
    if not 0 <= chart < math.prod(sizes):
        raise ValueError(f"chart {chart} invalid for {space}")
    out = []
    for s in reversed(sizes):
        out.append(chart % s)
        chart //= s
    return tuple(reversed(out))


def chart_from_indices(space: str, idx: Sequence[int]) -> int:
    c = 0
    for s, i in zip(factor_sizes(space), idx):
        c = c * s + i
    return c


def _to_number(x):
    if is_exact(x):
        return as_exact(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    z = complex(x)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("non-finite coordinate")
    return z


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """Point of P^1, P^2 or P^1 x P^1 given by homogeneous coordinates per factor.

    Coordinates may be exact (int, Fraction, GaussQ) or floating complex.
    """

    space: str
    coords: tuple[tuple, ...]

    def __post_init__(self):
        sizes = factor_sizes(self.space)
        coords = tuple(tuple(_to_number(c) for c in f) for f in self.coords)
        if len(coords) != len(sizes) or any(len(f) != s for f, s in zip(coords, sizes)):
            raise ValueError(f"coordinates {self.coords!r} do not match space {self.space}")
        for f in coords:
            if all(complex(c) == 0 for c in f):
                raise ValueError("every factor needs a nonzero coordinate")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, space: str, *coords) -> "ProjPoint":
        """``ProjPoint.of("P2", 1, 0, 0)`` or ``ProjPoint.of("P1xP1", (1, 0), (1, 0))``."""
        if factor_sizes(space) == (len(coords),) and not isinstance(coords[0], (tuple, list)):
            return cls(space, (tuple(coords),))
        return cls(space, tuple(tuple(c) for c in coords))

    @property
    def flat(self) -> tuple:
        return tuple(c for f in self.coords for c in f)

    @property
    def is_exact(self) -> bool:
        return all(is_exact(c) for c in self.flat)

    def as_complex(self) -> list[np.ndarray]:
        return [np.array([complex(c) for c in f]) for f in self.coords]

    def normalized(self) -> list[np.ndarray]:
        """Representative with the largest-modulus coordinate of each factor equal to 1."""
        out = []
        for f in self.as_complex():
            k = int(np.argmax(np.abs(f)))
            out.append(f / f[k])
        return out

    def home_chart(self) -> int:
        idx = [int(np.argmax(np.abs(f))) for f in self.as_complex()]
        return chart_from_indices(self.space, idx)

    def affine(self, chart: int | None = None) -> np.ndarray:
        """Affine coordinates in ``chart`` (default: home chart) as a complex vector."""
        if chart is None:
            chart = self.home_chart()
        idx = chart_indices(self.space, chart)
        out = []
        for f, i in zip(self.as_complex(), idx):
            if f[i] == 0:
                raise ValueError(f"point not in chart {chart}")
            out.extend(f[j] / f[i] for j in range(len(f)) if j != i)
        return np.array(out)

    def affine_exact(self, chart: int | None = None) -> list:
        """Exact affine coordinates (Gaussian rationals) in ``chart``."""
        if not self.is_exact:
            raise ValueError("point has inexact coordinates")
        if chart is None:
            chart = self.exact_chart()
        idx = chart_indices(self.space, chart)
        out = []
        for f, i in zip(self.coords, idx):
            if not f[i]:
                raise ValueError(f"point not in chart {chart}")
            out.extend(GaussQ(*GaussQ._parts(f[j])) / f[i] for j in range(len(f)) if j != i)
        return out

    def exact_chart(self) -> int:
        idx = []
        for f in self.coords:
            mods = [abs(complex(c)) for c in f]
            idx.append(int(np.argmax(mods)))
        return chart_from_indices(self.space, idx)

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        if self.space != other.space:
            return False
        return all(np.max(np.abs(a - b)) <= EQ_TOL for a, b in zip(self.normalized(), other.normalized()))

    __hash__ = None

    def __repr__(self):
        body = " ; ".join(":".join(str(c) for c in f) for f in self.coords)
        return f"ProjPoint({self.space}, [{body}])"


def from_affine(space: str, chart: int, z: Sequence) -> ProjPoint:
    idx = chart_indices(space, chart)
    z = list(z)
    coords, k = [], 0
    for s, i in zip(factor_sizes(space), idx):
        f = []
        for j in range(s):
            if j == i:
                f.append(1)
            else:
                f.append(z[k])
                k += 1
        coords.append(tuple(f))
    return ProjPoint(space, tuple(coords))


def homogeneous_from_affine(space: str, chart: int, Z: np.ndarray) -> list[np.ndarray]:
    """Lift an array of affine points (last axis = affine coordinates) to homogeneous arrays."""
    Z = np.asarray(Z, dtype=complex)
    idx = chart_indices(space, chart)
    out, k = [], 0
    one = np.ones(Z.shape[:-1], complex)
    for s, i in zip(factor_sizes(space), idx):
        for j in range(s):
            if j == i:
                out.append(one)
            else:
                out.append(Z[..., k])
                k += 1
    return out


def affine_from_homogeneous(space: str, chart: int, H: Sequence[np.ndarray]) -> np.ndarray:
    idx = chart_indices(space, chart)
    out, k = [], 0
    for s, i in zip(factor_sizes(space), idx):
        block = H[k : k + s]
        out.extend(block[j] / block[i] for j in range(s) if j != i)
        k += s
    return np.stack(out, axis=-1)


@dataclass(frozen=True)
class KClass:
    """Cohomology class: ``c * alpha_n`` on P^n or ``a*alpha_z + b*alpha_w`` on P^1 x P^1."""

    space: str
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        sizes = factor_sizes(self.space)
        coeffs = tuple(Fraction(c) for c in (self.coeffs if isinstance(self.coeffs, (tuple, list)) else (self.coeffs,)))
        if len(coeffs) != len(sizes):
            raise ValueError(f"{self.space} needs {len(sizes)} class coefficient(s)")
        if any(c < 0 for c in coeffs):
            raise ValueError("class coefficients must be >= 0")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def pn(cls, n: int, c=1) -> "KClass":
        return cls(f"P{n}", (c,))

    @classmethod
    def p1p1(cls, a, b) -> "KClass":
        return cls("P1xP1", (a, b))

    @property
    def is_kahler(self) -> bool:
        return all(c > 0 for c in self.coeffs)

    @property
    def dim(self) -> int:
        return complex_dim(self.space)


def fs_potential(cls: KClass, chart: int, z) -> np.ndarray:
    """Local potential of the weighted Fubini-Study form in ``chart``; zero at the chart origin."""
    chart_indices(cls.space, chart)
    Z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(Z)):
        raise ValueError("non-finite coordinates")
    n = complex_dim(cls.space)
    if Z.shape[-1] != n:
        raise ValueError(f"expected {n} affine coordinates")
    if cls.space == "P1xP1":
        a, b = (float(c) for c in cls.coeffs)
        return 0.5 * a * np.log1p(np.abs(Z[..., 0]) ** 2) + 0.5 * b * np.log1p(np.abs(Z[..., 1]) ** 2)
    c = float(cls.coeffs[0])
    return 0.5 * c * np.log1p(np.sum(np.abs(Z) ** 2, axis=-1))


def reference_log_norm(space: str, weights: Sequence, H: Sequence[np.ndarray]) -> np.ndarray:
    """``sum_g weight_g * log||Z_g||`` over the factors of homogeneous coordinates ``H``."""
    out, k = 0.0, 0
    for s, w in zip(factor_sizes(space), weights):
        block = np.stack([np.asarray(h) for h in H[k : k + s]])
        out = out + float(w) * _log_norm(block)
        k += s
    return out


def _log_norm(block: np.ndarray) -> np.ndarray:
    mag = np.abs(block)
    m = np.max(mag, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(m > 0, mag / np.where(m > 0, m, 1), 0)
        return np.log(m) + 0.5 * np.log(np.sum(r * r, axis=0))


def chordal_distance(p: ProjPoint, q: ProjPoint) -> float:
    """Fubini-Study chordal distance ``|z ^ w| / (|z| |w|)``, Euclidean-combined over factors."""
    if p.space != q.space:
        raise ValueError(f"space mismatch: {p.space} vs {q.space}")
    total = 0.0
    for z, w in zip(p.as_complex(), q.as_complex()):
        z = z / np.linalg.norm(z)
        w = w / np.linalg.norm(w)
        s = max(0.0, 1.0 - abs(np.vdot(z, w)) ** 2)
        total += s
    return math.sqrt(total)


def volume(cls: KClass) -> Fraction:
    """Top self-intersection of the class: ``c^n`` on P^n, ``2ab`` on P^1 x P^1."""
    if cls.space == "P1xP1":
        a, b = cls.coeffs
        return 2 * a * b
    return cls.coeffs[0] ** cls.dim


def indicators(cls: KClass, point: ProjPoint | None = None) -> tuple[Fraction, Fraction]:
    """Maximal Lelong number and Seshadri constant of a Kähler class (both point-independent)."""
    if not cls.is_kahler:
        raise ValueError("indicators require a Kähler class")
    if point is not None and point.space != cls.space:
        raise ValueError("point and class live on different spaces")
    if cls.space == "P1xP1":
        a, b = cls.coeffs
        return a + b, min(a, b)
    c = cls.coeffs[0]
    return c, c


def frac_root_le(x: Fraction, n: int, y: Fraction) -> bool:
    """Exact test ``x <= y**(1/n)`` for ``x, y >= 0``."""
    return x**n <= y


def frac_root_ge(x: Fraction, n: int, y: Fraction) -> bool:
    return x**n >= y
