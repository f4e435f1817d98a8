"""Command-line front end: JSON scenarios in, CSV out.

Exit codes: 0 success, 1 I/O failure, 2 invalid scenario, 3 numerical check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from . import acceptance
from . import dynamics as dyn
from . import envelopes as env
from . import geometry as geo
from . import ma_grid
from . import potentials as pot
from .geometry import KClass, ProjPoint
from .lelong import DEFAULT_SEED, lelong_estimate
from .poly import GaussQ, format_rational, parse_poly

COMMANDS = ("eval", "lelong", "envelope", "ma", "dyn", "indicators", "transfer", "verify")
EXIT_IO, EXIT_INVALID, EXIT_NUMERIC = 1, 2, 3


class ScenarioError(ValueError):
    pass


# -- scenario parsing -------------------------------------------------------


def _number(x):
    if isinstance(x, dict):
        return GaussQ(Fraction(str(x.get("re", 0))), Fraction(str(x.get("im", 0))))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, bool):
        raise ScenarioError("booleans are not numbers")
    return x


def _point(space: str, coords) -> ProjPoint:
    if space == "P1xP1":
        return ProjPoint(space, tuple(tuple(_number(c) for c in f) for f in coords))
    return ProjPoint(space, (tuple(_number(c) for c in coords),))


_VARS = {"P1": ("z0", "z1"), "P2": ("z0", "z1", "z2"), "P1xP1": ("z0", "z1", "w0", "w1")}


def build_potential(doc: dict):
    """Potential object and default pole list from a scenario's potential specification."""
    fam = doc.get("family")
    if fam is None:
        raise ScenarioError("scenario needs a 'family' (or 'inline' with a 'potential' document)")
    if fam == "cusp":
        phi = pot.make_cusp_green(int(doc["n"]), int(doc["k"]))
    elif fam == "conic":
        phi = acceptance.two_conic_green()
    elif fam == "rational":
        space = doc.get("space", "P2")
        comps = [parse_poly(c, _VARS[space]) for c in doc["components"]]
        poles = [_point(space, p) for p in doc["poles"]] if "poles" in doc else None
        phi = pot.make_rational_green(comps, space, poles)
    elif fam == "hyperplanes":
        space = doc.get("space", "P2")
        lines = [parse_poly(c, _VARS[space]) for c in doc["lines"]] if "lines" in doc else pot.coordinate_hyperplanes(space)
        phi = pot.make_hyperplane_avg(lines)
    elif fam == "rab":
        pole = _point("P1xP1", doc["pole"]) if "pole" in doc else None
        phi = pot.make_rab(_number(doc["a"]), _number(doc["b"]), pole)
    elif fam in ("greenp1", "greenp1_plane"):
        n, m, k = (int(doc[key]) for key in ("n", "m", "k"))
        Q = parse_poly(str(doc.get("Q", "0")), ("t0", "t1", "t2"))
        phi = (pot.make_greenp1_family if fam == "greenp1" else pot.make_greenp1_plane)(n, m, k, Q)
    elif fam == "inline":
        phi = pot.LogNormPotential.from_json(doc["potential"])
    elif fam == "fs":
        space = doc.get("space", "P2")
        coeffs = [_number(c) for c in doc.get("class", [1] if space != "P1xP1" else [1, 1])]
        return pot.ZeroPotential(KClass(space, tuple(coeffs))), []
    elif fam == "dyn":
        e = dyn.lift(list(doc["h"]))
        return dyn.DynGreen(e, int(doc.get("n", 8))), list(e.indeterminacy or [])
    elif fam == "radial":
        g = env.radial_partial_green(_number(doc["gamma"]), int(doc.get("n", 2)))
        return g, [ProjPoint.of(g.space, *([1] + [0] * g.n))]
    else:
        raise ScenarioError(f"unknown family {fam!r}")
    return phi, list(phi.poles or [])


def _space_of(phi) -> str:
    return phi.space


def _value_at(phi, p: ProjPoint) -> float:
    if isinstance(phi, pot.LogNormPotential):
        return pot.eval_potential(phi, p)
    chart = p.home_chart()
    return float(phi.eval_affine(chart, p.affine(chart)[None, :])[0])


# -- commands ---------------------------------------------------------------


def cmd_eval(sc: dict) -> tuple[list[str], list[list], int]:
    phi, _ = build_potential(sc)
    pts = [_point(_space_of(phi), c) for c in sc["points"]]
    return ["point", "value"], [[repr(p), _value_at(phi, p)] for p in pts], 0


def cmd_lelong(sc: dict) -> tuple[list[str], list[list], int]:
    phi, poles = build_potential(sc)
    if "point" in sc:
        p = _point(_space_of(phi), sc["point"])
    elif poles:
        p = poles[0]
    else:
        raise ScenarioError("no point given and the potential records no pole")
    est = lelong_estimate(phi, p, float(sc.get("r0", 0.1)), int(sc.get("levels", 8)), int(sc.get("samples", 4096)), int(sc.get("seed", DEFAULT_SEED)))
    rows = [["level", r, m, s] for r, m, s in est.rows()]
    status = 0
    if isinstance(phi, pot.LogNormPotential) and p.is_exact:
        exact = pot.lelong_exact(phi, p)
        rows.append(["exact", "", float(exact), format_rational(exact)])
    if "expect" in sc:
        if abs(est.slope - float(_number(sc["expect"]))) > float(sc.get("tol", 0.02)):
            status = EXIT_NUMERIC
    rows.append(["estimate", "", est.slope, est.stderr])
    return ["kind", "r", "value", "aux"], rows, status


def cmd_envelope(sc: dict) -> tuple[list[str], list[list], int]:
    mode = sc.get("mode", "toric")
    gamma = Fraction(str(sc["gamma"]))
    if mode == "radial":
        g = env.radial_partial_green(gamma, int(sc.get("n", 2)))
        prof = env.radial_envelope(env.fs_obstacle(int(sc.get("points", 4096)), float(sc.get("x_min", -10)), float(sc.get("x_max", 10))), gamma)
        return ["x", "w", "closed_form"], [[x, w, c] for x, w, c in zip(prof.x, prof.w, g.V(prof.x))], 0
    if mode != "toric":
        raise ScenarioError("envelope mode must be 'radial' or 'toric'")
    a, b = Fraction(str(sc.get("a", 1))), Fraction(str(sc.get("b", 1)))
    h = env.toric_fs_obstacle(a, b, float(sc.get("L", env.DEFAULT_L)), int(sc.get("points", env.DEFAULT_PRIMAL)))
    w = env.toric_envelope(h, gamma, int(sc.get("dual_points", env.DEFAULT_DUAL)))
    if sc.get("masses"):
        m = env.toric_ma_masses(w, h=h, dual_points=int(sc.get("dual_points", env.DEFAULT_DUAL)))
        rows = [["dirac_mass", m.dirac_mass], ["boundary_mass", m.boundary_mass], ["interior_mass", m.interior_mass], ["total", m.total], ["ambiguous_fraction", m.ambiguous_fraction]]
        return ["key", "value"], rows, 0
    gap = h.w - w.w
    X, Y = np.meshgrid(h.x, h.y, indexing="ij")
    edge = (X == h.x[0]) | (Y == h.y[0])
    cls = np.where(gap <= 2e-3, "contact", np.where(edge, "corner", "free"))
    rows = [[X[i, j], Y[i, j], w.w[i, j], gap[i, j], cls[i, j]] for i in range(h.x.size) for j in range(h.y.size)]
    return ["x", "y", "w", "h_minus_w", "class"], rows, 0


def cmd_ma(sc: dict) -> tuple[list[str], list[list], int]:
    phi, poles = build_potential(sc)
    if "poles" in sc:
        poles = [_point(_space_of(phi), c) for c in sc["poles"]]
    kclass = getattr(phi, "kclass", None)
    # cusp poles are anisotropic (x ~ y^(k/n)), so their default exclusion ball is wider
    default_ball = 1.2 if sc.get("family") == "cusp" else 0.45
    kw = dict(ball_radius=float(sc.get("ball_radius", default_ball)), h=float(sc.get("grid_h", ma_grid.DEFAULT_H)), box=float(sc.get("chart_box", ma_grid.DEFAULT_BOX)), kclass=kclass)
    if "weights" in sc:
        chk = ma_grid.check_green(phi, poles, [_number(w) for w in sc["weights"]], **kw)
        rows = [[k, v] for k, v in chk.report.rows()]
        rows.append(["check_green", "pass" if chk.passed else "fail"])
        rows += [["failure", f] for f in chk.failures]
        return ["key", "value"], rows, 0 if chk.passed else EXIT_NUMERIC
    rep = ma_grid.ma_report(phi, poles, **kw)
    return ["key", "value"], [[k, v] for k, v in rep.rows()], 0


def cmd_dyn(sc: dict) -> tuple[list[str], list[list], int]:
    e = dyn.lift(list(sc["h"]))
    n_max = int(sc.get("n_max", 5))
    p = _point("P2", sc["point"]) if "point" in sc else None
    wr = dyn.weakly_regular_check(e)
    header = ["n", "nu_n", "nu_n_float"] + (["g_n"] if p is not None else [])
    rows = []
    for n in range(1, n_max + 1):
        nu = dyn.nu_n_exact(e, n)
        row = [n, format_rational(nu), float(nu)]
        if p is not None:
            row.append(dyn.dyn_green_eval(e, n, p))
        rows.append(row)
    if not wr:
        raise ScenarioError(wr.reason)
    return header, rows, 0


def cmd_indicators(sc: dict) -> tuple[list[str], list[list], int]:
    space = sc.get("space", "P2")
    if space == "P1xP1":
        cls = KClass(space, (_number(sc.get("a", 1)), _number(sc.get("b", 1))))
    else:
        cls = KClass(space, (_number(sc.get("c", 1)),))
    nu, eps = geo.indicators(cls)
    return ["nu", "epsilon"], [[format_rational(nu), format_rational(eps)]], 0


def cmd_transfer(sc: dict) -> tuple[list[str], list[list], int]:
    n, m, k = (int(sc.get(key, d)) for key, d in (("n", 1), ("m", 1), ("k", 3)))
    Q = parse_poly(str(sc.get("Q", "t0^4")), ("t0", "t1", "t2"))
    u = pot.make_greenp1_family(n, m, k, Q)
    R = pot.make_greenp1_plane(n, m, k, Q)
    fwd = pot.phi_forward(u)
    back = pot.phi_inverse(fwd, target_weights=u.ref_weights)
    rng = np.random.default_rng(int(sc.get("seed", 0)))
    N = int(sc.get("points", 100))
    Z = (rng.normal(size=(N, 2)) + 1j * rng.normal(size=(N, 2))) * float(sc.get("scale", 1.5))
    cols = [u.local(0, Z), back.local(0, Z), fwd.local(0, Z), R.local(0, Z)]
    rows = [[Z[i, 0].real, Z[i, 0].imag, Z[i, 1].real, Z[i, 1].imag] + [c[i] for c in cols] for i in range(N)]
    err = max(float(np.max(np.abs(cols[0] - cols[1]))), float(np.max(np.abs(cols[2] - cols[3]))))
    status = 0 if err <= float(sc.get("tol", 1e-10)) else EXIT_NUMERIC
    return ["z1_re", "z1_im", "w1_re", "w1_im", "u_local", "roundtrip_local", "forward_local", "R_local"], rows, status


def cmd_verify(sc: dict) -> tuple[list[str], list[list], int]:
    preset = sc.get("preset", "fast")
    results = acceptance.run_all(preset)
    for r in results:
        print(r.line(), file=sys.stderr, flush=True)
    rows = [[r.number, r.title, "PASS" if r.passed else "FAIL", r.measured, r.target, r.tolerance, round(r.seconds, 3)] for r in results]
    status = 0 if all(r.passed for r in results) else EXIT_NUMERIC
    return ["criterion", "title", "status", "measured", "target", "tolerance", "seconds"], rows, status


HANDLERS = {
    "eval": cmd_eval,
    "lelong": cmd_lelong,
    "envelope": cmd_envelope,
    "ma": cmd_ma,
    "dyn": cmd_dyn,
    "indicators": cmd_indicators,
    "transfer": cmd_transfer,
    "verify": cmd_verify,
}


# -- CSV and driver -----------------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def render_csv(command: str, scenario: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    params = json.dumps(scenario, sort_keys=True, default=str)
    buf.write(f"# pluripot {__version__} command={command} params={params}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def run(scenario: dict, out: str | None = None) -> int:
    """Execute one scenario; returns the process exit code."""
    command = scenario.get("command")
    if command not in HANDLERS:
        print(f"error: unknown command {command!r}; expected one of {', '.join(COMMANDS)}", file=sys.stderr)
        return EXIT_INVALID
    try:
        header, rows, status = HANDLERS[command](scenario)
    except (ValueError, KeyError, TypeError, ZeroDivisionError) as err:
        print(f"error: invalid scenario: {err}", file=sys.stderr)
        return EXIT_INVALID
    text = render_csv(command, scenario, header, rows)
    out = out or scenario.get("out")
    try:
        if out and out != "-":
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            Path(out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except OSError as err:
        print(f"error: cannot write output: {err}", file=sys.stderr)
        return EXIT_IO
    return status


def _parse_param(raw: str) -> tuple[str, Any]:
    if "=" not in raw:
        raise ScenarioError(f"--param expects key=value, got {raw!r}")
    key, val = raw.split("=", 1)
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def _set_threads(n: int | None):
    env_n = os.environ.get("PLURIPOT_THREADS")
    if env_n:
        n = int(env_n)
    if n:
        import numba

        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pluripot", description="Green functions, Lelong numbers and Monge-Ampère masses on P^n and P^1 x P^1.")
    parser.add_argument("--version", action="version", version=f"pluripot {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS + ("run",):
        p = sub.add_parser(name, help="run a scenario file" if name == "run" else f"{name} computation")
        p.add_argument("scenario", nargs="?" if name != "run" else None, help="JSON scenario file")
        p.add_argument("--param", "-p", action="append", default=[], metavar="KEY=VALUE", help="override a scenario field (VALUE parsed as JSON when possible)")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--seed", type=int, help="sampling seed")
        p.add_argument("--threads", type=int, help="worker threads (PLURIPOT_THREADS overrides)")
        p.add_argument("--preset", choices=sorted(acceptance.PRESETS), help="grid preset for verify")
        p.add_argument("--grid-h", type=float, help="grid spacing for ma")
        p.add_argument("--ball-radius", type=float, help="excluded ball radius for ma")
        p.add_argument("--chart-box", type=float, help="half-width of the chart box for ma")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    scenario: dict = {}
    if args.scenario:
        try:
            text = Path(args.scenario).read_text(encoding="utf-8")
        except OSError as err:
            print(f"error: cannot read scenario: {err}", file=sys.stderr)
            return EXIT_IO
        try:
            scenario = json.loads(text)
        except json.JSONDecodeError as err:
            print(f"error: malformed scenario JSON: {err}", file=sys.stderr)
            return EXIT_INVALID
        if not isinstance(scenario, dict):
            print("error: scenario must be a JSON object", file=sys.stderr)
            return EXIT_INVALID
    try:
        for raw in args.param:
            k, v = _parse_param(raw)
            scenario[k] = v
    except ScenarioError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    if args.command != "run":
        scenario["command"] = args.command
    for flag, key in (("seed", "seed"), ("preset", "preset"), ("grid_h", "grid_h"), ("ball_radius", "ball_radius"), ("chart_box", "chart_box")):
        v = getattr(args, flag)
        if v is not None:
            scenario[key] = v
    _set_threads(args.threads)
    return run(scenario, args.out)


if __name__ == "__main__":
    sys.exit(main())
