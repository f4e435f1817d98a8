"""The twelve acceptance checks, shared by the test suite and ``pluripot verify``."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import dynamics as dyn
from . import envelopes as env
from . import geometry as geo
from . import ma_grid
from . import potentials as pot
from .geometry import KClass, ProjPoint
from .lelong import lelong_estimate
from .poly import SparsePoly

PRESETS = {
    "fast": {"ma_h": 0.1, "calib_h": (0.1, 0.05)},
    "full": {"ma_h": 0.05, "calib_h": (0.1, 0.05)},
}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: str
    target: str
    tolerance: str
    seconds: float = 0.0
    details: list[str] = field(default_factory=list)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.title}: measured {self.measured}; target {self.target} (tol {self.tolerance}); {self.seconds:.2f}s"


def random_classes(count: int = 20, seed: int = 1) -> list[KClass]:
    rng = random.Random(seed)
    return [KClass.p1p1(Fraction(rng.randint(1, 40), rng.randint(1, 12)), Fraction(rng.randint(1, 40), rng.randint(1, 12))) for _ in range(count)]


def _p2_vars():
    return [SparsePoly.var(i, 3) for i in range(3)]


def two_conic_green() -> pot.LogNormPotential:
    z0, z1, z2 = _p2_vars()
    return pot.make_rational_green([z1 * z1 - z0 * z0, z2 * z2 - z0 * z0])


def greenp1_instances():
    """The P^1 x P^1 family at (n, m, k) = (1, 1, 3): Q with a constant term (j = 2) and Q(1,0,0) = 0 (j = 3)."""
    t0, t1, t2 = _p2_vars()
    return [(pot.make_greenp1_family(1, 1, 3, t0**4), Fraction(2, 3)), (pot.make_greenp1_family(1, 1, 3, t0**3 * (t1 + 2 * t2)), Fraction(1))]


def exact_lelong_cases():
    """(label, potential, point, exact value) for the closed-form families."""
    cases = []
    for n, k in [(2, 1), (3, 2), (5, 3)]:
        cases.append((f"cusp({n},{k})", pot.make_cusp_green(n, k), ProjPoint.of("P2", 1, 0, 0), Fraction(k, n)))
    hyp = pot.make_hyperplane_avg(pot.coordinate_hyperplanes("P2"))
    for p in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        cases.append((f"hyperplanes{list(p)}", hyp, ProjPoint.of("P2", *p), Fraction(2, 3)))
    for u, j in greenp1_instances():
        cases.append((f"greenp1(1,1,3) j={j * 3}", u, u.poles[0], j))
    return cases


def _timed(fn: Callable[[], CriterionResult]) -> CriterionResult:
    t = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - t
    return res


def c1_indicators() -> CriterionResult:
    t = time.perf_counter()
    bad = []
    if geo.indicators(KClass.pn(2)) != (1, 1):
        bad.append("P2")
    for cls in random_classes():
        a, b = cls.coeffs
        if geo.indicators(cls) != (a + b, min(a, b)):
            bad.append(str(cls.coeffs))
    dt = time.perf_counter() - t
    ok = not bad and dt < 1.0
    return CriterionResult(1, "indicator formulas", ok, f"{21 - len(bad)}/21 exact", "(1,1) on P2, (a+b,min(a,b)) on P1xP1", "exact, <1s", details=bad)


def c2_inequality_chain() -> CriterionResult:
    bad = []
    for cls in random_classes() + [KClass.pn(2)]:
        nu, eps = geo.indicators(cls)
        V = geo.volume(cls)
        n = cls.dim
        if not (geo.frac_root_le(eps, n, V) and geo.frac_root_ge(nu, n, V)):
            bad.append(str(cls.coeffs))
    return CriterionResult(2, "eps <= V^(1/n) <= nu", not bad, f"{21 - len(bad)}/21 hold", "all classes", "exact", details=bad)


def c3_exact_lelong() -> CriterionResult:
    t = time.perf_counter()
    cases = exact_lelong_cases()
    bad = [f"{lab}: {pot.lelong_exact(phi, p)} != {v}" for lab, phi, p, v in cases if pot.lelong_exact(phi, p) != v]
    dt = time.perf_counter() - t
    return CriterionResult(3, "exact Lelong numbers", not bad and dt < 1.0, f"{len(cases) - len(bad)}/{len(cases)} equal", "k/n, 2/3, j/(nk)", "exact, <1s", details=bad)


def c4_numeric_lelong() -> CriterionResult:
    worst, slowest, details = 0.0, 0.0, []
    for lab, phi, p, v in exact_lelong_cases():
        t = time.perf_counter()
        est = lelong_estimate(phi, p, r0=0.1, levels=8, samples=4096)
        dt = time.perf_counter() - t
        err = abs(est.slope - float(v))
        worst, slowest = max(worst, err), max(slowest, dt)
        details.append(f"{lab}: {est.slope:.5f} vs {float(v):.5f}")
    return CriterionResult(4, "numeric Lelong estimator", worst <= 0.02 and slowest < 10, f"max error {worst:.2e}", "exact values", "0.02, <10s per case", details=details)


def c5_radial() -> CriterionResult:
    t = time.perf_counter()
    g = env.radial_partial_green(Fraction(1, 2))
    obstacle = env.fs_obstacle(4096)
    e = env.radial_envelope(obstacle, Fraction(1, 2))
    err = float(np.max(np.abs(e.w - g.V(e.x))))
    closed = abs(g.R - 1) < 1e-15 and abs(g.C - 0.5 * np.log(2)) < 1e-15
    dt = time.perf_counter() - t
    return CriterionResult(5, "radial envelope", closed and err <= 1e-6 and dt < 1, f"sup error {err:.2e}, R={g.R}, C={g.C:.6f}", "closed form R=1, C=log(2)/2", "1e-6, <1s")


def c6_toric() -> CriterionResult:
    t = time.perf_counter()
    h = env.toric_fs_obstacle(1, 1, L=4.0, points=257)
    w = env.toric_envelope(h, 1)
    X, Y = np.meshgrid(h.x, h.y, indexing="ij")
    err = float(np.max(np.abs(w.w - env.unit_toric_closed_form(X, Y))))
    dt = time.perf_counter() - t
    return CriterionResult(6, "toric envelope", err <= 2e-2 and dt < 30, f"sup error {err:.2e}", "log(e^x+e^y) on x+y<=0, h elsewhere", "2e-2, <30s")


def c7_toric_masses() -> CriterionResult:
    h = env.toric_fs_obstacle(1, 1)
    m1 = env.toric_ma_masses(env.toric_envelope(h, 1), h=h)
    m2 = env.toric_ma_masses(env.toric_envelope(h, Fraction(1, 2)), h=h)
    ok = abs(m1.dirac_mass - 1) <= 0.05 and abs(m1.boundary_mass - 1) <= 0.05 and abs(m1.total - 2) <= 0.02 and abs(m2.dirac_mass - 0.25) <= 0.05
    return CriterionResult(
        7,
        "toric MA masses",
        ok,
        f"gamma=1: dirac {m1.dirac_mass:.4f}, boundary {m1.boundary_mass:.4f}, total {m1.total:.4f}; gamma=1/2: dirac {m2.dirac_mass:.4f}",
        "1, 1, 2; 0.25",
        "0.05",
    )


def c8_calibration(preset: str = "fast") -> CriterionResult:
    coarse, fine = PRESETS[preset]["calib_h"]
    zero = pot.ZeroPotential(KClass.pn(2))
    r_coarse = ma_grid.ma_report(zero, h=coarse)
    r_fine = ma_grid.ma_report(zero, h=fine)
    e_c, e_f = abs(r_coarse.smooth_integral - 1), abs(r_fine.smooth_integral - 1)
    ok = fine == 0.05 and e_f <= 1e-3 and e_f < e_c
    return CriterionResult(8, "grid MA calibration", ok, f"mass {r_fine.smooth_integral:.7f} at h={fine} (error {e_f:.1e}; {e_c:.1e} at h={coarse})", "1", "1e-3, decreasing")


def c9_green_checks(preset: str = "fast", _cache: dict | None = None) -> CriterionResult:
    h = PRESETS[preset]["ma_h"]
    cusp = pot.make_cusp_green(2, 1)
    rc = ma_grid.check_green(cusp, cusp.poles, [1], ball_radius=1.2, h=h)
    g = two_conic_green()
    rg = ma_grid.check_green(g, g.poles, [Fraction(1, 4)] * 4, ball_radius=0.45, h=h)
    if _cache is not None:
        _cache["conic_report"] = rg.report
    ok = bool(rc) and bool(rg)
    meas = f"cusp m={rc.report.pole_masses[0]:.4f}; conic m=" + ",".join(f"{m:.4f}" for m in rg.report.pole_masses) + f", off-pole {rg.report.smooth_integral:.4f}"
    return CriterionResult(9, "Green-function verification", ok, meas, "1; 1/4 x4; <=0.02", "0.02", details=rc.failures + rg.failures)


def c10_dynamics() -> CriterionResult:
    t = time.perf_counter()
    details, ok = [], True
    for lam, mu in [(2, 1), (3, 1), (3, 2), (4, 3)]:
        seq = dyn.nu_sequence(dyn.family_map(lam, mu), 5)
        want = Fraction(lam - mu, lam)
        good = all(v == want for v in seq) and all(a <= b for a, b in zip(seq, seq[1:]))
        ok &= good
        details.append(f"({lam},{mu}): {[str(v) for v in seq]}")
    hen = dyn.nu_sequence(dyn.henon_map(3), 5)
    ok &= all(v == Fraction(2, 3) for v in hen)
    e = dyn.family_map(2, 1)
    est = lelong_estimate(dyn.DynGreen(e, 8), ProjPoint.of("P2", 0, 0, 1))
    err = abs(est.slope - 0.5)
    ok &= err <= 0.03
    dt = time.perf_counter() - t
    ok &= dt < 60
    return CriterionResult(10, "dynamics", ok, f"nu_n exact for all families; Henon {hen[-1]}; g_8 slope {est.slope:.4f}", "(lam-mu)/lam; 2/3; 1/2", "exact; 0.03; <60s", details=details)


def c11_transfer(seed: int = 0) -> CriterionResult:
    t0, t1, t2 = _p2_vars()
    Q = t0**4
    u = pot.make_greenp1_family(1, 1, 3, Q)
    R = pot.make_greenp1_plane(1, 1, 3, Q)
    rng = np.random.default_rng(seed)
    Z = (rng.normal(size=(100, 2)) + 1j * rng.normal(size=(100, 2))) * 1.5
    fwd = pot.phi_forward(u)
    round_trip = pot.phi_inverse(fwd, target_weights=u.ref_weights)
    e1 = float(np.max(np.abs(round_trip.local(0, Z) - u.local(0, Z))))
    back = pot.phi_forward(pot.phi_inverse(R))
    e2 = float(np.max(np.abs(back.local(0, Z) - R.local(0, Z))))
    e3 = float(np.max(np.abs(fwd.local(0, Z) - R.local(0, Z))))
    err = max(e1, e2, e3)
    return CriterionResult(11, "birational transfer", err <= 1e-10, f"round trip {max(e1, e2):.1e}, forward vs R_f {e3:.1e}", "identity on C^2", "1e-10")


def c12_negative_controls(preset: str = "fast", conic_report=None) -> CriterionResult:
    details = []
    g = two_conic_green()
    weights = [Fraction(1, 2), Fraction(1, 6), Fraction(1, 6), Fraction(1, 6)]
    chk = ma_grid.check_green(g, g.poles, weights, ball_radius=0.45, h=PRESETS[preset]["ma_h"], report=conic_report)
    wrong_fails = not chk.passed and any(f.startswith("pole 0") for f in chk.failures)
    details.append(f"wrong weights: {'rejected' if wrong_fails else 'accepted'}")
    holo = dyn.lift(["x^2", "y^2"])
    flagged = holo.is_holomorphic
    try:
        dyn.nu_n_exact(holo, 1)
        refused = False
    except ValueError:
        refused = True
    details.append(f"holomorphic map flagged: {flagged and refused}")
    try:
        env.toric_envelope(env.toric_fs_obstacle(1, 1, points=65), 3)
        rejected = False
    except ValueError:
        rejected = True
    details.append(f"gamma > a+b rejected: {rejected}")
    ok = wrong_fails and flagged and refused and rejected
    return CriterionResult(12, "negative controls", ok, "; ".join(details), "all rejected", "-", details=chk.failures)


def run_criterion(number: int, preset: str = "fast", cache: dict | None = None) -> CriterionResult:
    """Run one criterion; ``cache`` lets criterion 12 reuse the grid report of criterion 9."""
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    cache = {} if cache is None else cache
    jobs = {
        1: c1_indicators,
        2: c2_inequality_chain,
        3: c3_exact_lelong,
        4: c4_numeric_lelong,
        5: c5_radial,
        6: c6_toric,
        7: c7_toric_masses,
        8: lambda: c8_calibration(preset),
        9: lambda: c9_green_checks(preset, cache),
        10: c10_dynamics,
        11: c11_transfer,
        12: lambda: c12_negative_controls(preset, cache.get("conic_report")),
    }
    if number not in jobs:
        raise ValueError(f"no criterion {number}")
    try:
        return _timed(jobs[number])
    except Exception as err:  # a crash is a failed criterion, not an aborted suite
        return CriterionResult(number, "error", False, f"{type(err).__name__}: {err}", "-", "-")


def run_all(preset: str = "fast", only: set[int] | None = None) -> list[CriterionResult]:
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    cache: dict = {}
    return [run_criterion(n, preset, cache) for n in range(1, 13) if not only or n in only]
