"""Numerical Lelong numbers as slopes of sphere means against log r."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.stats import qmc

from . import geometry as geo
from .geometry import ProjPoint

MAX_R = 0.5
NEG_FRACTION = 0.01
DEFAULT_SEED = 20240


@dataclass(frozen=True)
class LelongEstimate:
    slope: float
    stderr: float
    radii: np.ndarray
    means: np.ndarray
    secants: np.ndarray = field(repr=False)
    neg_inf_counts: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not np.all(np.diff(self.radii) < 0):
            raise ValueError("radii must decrease strictly")
        if not np.isfinite(self.slope):
            raise ValueError("non-finite slope estimate")

    def rows(self):
        """(r, m(r), secant slope to the previous level) triples; the first secant is nan."""
        sec = np.concatenate([[np.nan], self.secants])
        return list(zip(self.radii.tolist(), self.means.tolist(), sec.tolist()))


def sphere_directions(space: str, samples: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Quasi-uniform unit vectors in the affine chart (complex, shape ``(samples, n)``)."""
    n = geo.complex_dim(space)
    if n == 1:
        (th,) = qmc.Sobol(1, seed=seed).random(samples).T
        return np.exp(2j * np.pi * th)[:, None]
    # Hopf coordinates: |u1|^2 uniform on [0,1] gives the uniform measure on S^3
    s, t1, t2 = qmc.Sobol(3, seed=seed).random(samples).T
    return np.stack([np.sqrt(s) * np.exp(2j * np.pi * t1), np.sqrt(1 - s) * np.exp(2j * np.pi * t2)], axis=-1)


def _values_on_sphere(phi, center: ProjPoint, r: float, dirs: np.ndarray) -> np.ndarray:
    chart = center.home_chart()
    a = center.affine(chart)
    return np.asarray(phi.eval_affine(chart, a + r * dirs), dtype=float)


def _masked_mean(vals: np.ndarray, r: float) -> tuple[float, int]:
    bad = ~np.isfinite(vals)
    nbad = int(bad.sum())
    if nbad == vals.size:
        raise ValueError(f"all samples are -inf on the sphere of radius {r}: the pole set meets it")
    if nbad > NEG_FRACTION * vals.size:
        raise ValueError(f"{nbad} of {vals.size} samples are -inf at radius {r}; the mean is unreliable")
    return float(vals[~bad].mean()), nbad


def sphere_mean(phi, center: ProjPoint, r: float, samples: int = 4096, seed: int = DEFAULT_SEED, use_max: bool = False) -> float:
    """Mean (or max, for convexity diagnostics) of ``phi`` on the chart sphere of radius ``r`` around ``center``."""
    if not 0 < r <= MAX_R:
        raise ValueError(f"radius must lie in (0, {MAX_R}]")
    if samples < 64:
        raise ValueError("need at least 64 samples")
    if center.space != phi.space:
        raise ValueError("space mismatch")
    vals = _values_on_sphere(phi, center, r, sphere_directions(phi.space, samples, seed))
    if use_max:
        return float(np.max(vals))
    return _masked_mean(vals, r)[0]


def lelong_estimate(phi, center: ProjPoint, r0: float = 0.1, levels: int = 8, samples: int = 4096, seed: int = DEFAULT_SEED) -> LelongEstimate:
    """Regression slope of sphere means against log r over the deepest half of ``levels`` radii ``r0 * 2**-j``."""
    if levels < 4:
        raise ValueError("need at least 4 levels")
    if not 0 < r0 <= MAX_R:
        raise ValueError(f"r0 must lie in (0, {MAX_R}]")
    if samples < 64:
        raise ValueError("need at least 64 samples")
    if center.space != phi.space:
        raise ValueError("space mismatch")
    radii = r0 * 2.0 ** -np.arange(levels)
    dirs = sphere_directions(phi.space, samples, seed)
    means, bad = [], []
    for r in radii:
        m, nb = _masked_mean(_values_on_sphere(phi, center, r, dirs), r)
        means.append(m)
        bad.append(nb)
    means = np.array(means)
    logs = np.log(radii)
    deep = slice(levels // 2, levels)
    fit = stats.linregress(logs[deep], means[deep])
    secants = np.diff(means) / np.diff(logs)
    stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    return LelongEstimate(float(fit.slope), stderr, radii, means, secants, np.array(bad))
