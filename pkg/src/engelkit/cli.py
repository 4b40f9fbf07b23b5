"""Command-line front end: ``engelkit <command> [flags]``.

Exit codes: 0 success, 1 domain error (module error names are printed
verbatim), 2 usage error.
"""

from __future__ import annotations

import argparse
import inspect
import json
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from . import degree as deg
from . import diskcalc
from .acceptance import CHECKS
from .curves import (ENGEL, TOL_LEG, Curve, CurveFamily, default_tol_pos,
                     find_self_intersections, geiges_project, horizontal_residual,
                     legendrian_residual, table_curve, total_area)
from .errors import EngelkitError
from .families import (figure_eight, stereographic_torus_knot, torus_knot, unknot_front,
                       unknot_horizontal)
from .invariants import (front_diagram, horizontal_rotation_number, rotation_number,
                         tb_linking_oracle, thurston_bennequin)
from .lifts import (TOL_AREA, area_at_tangency, area_twist, double_stabilization,
                    lift_horizontal, stabilize)
from .render import disk_svg, front_svg, write_svg

FAMILIES = ("unknot_front", "torus_knot(p,q)", "stereographic_torus(p,q)", "figure_eight",
            "unknot_horizontal", "area_twist(theta_samples)", "stabilized(base,signs...)",
            "double_stabilized(base,loc)", "table(file)")
MAPS = ("identity", "antipodal", "antipodal_s3", "square_s3", "suspension(k)", "power(k)",
        "kalman(p,q,alpha[,t0])", "<file>.npy")


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# curve specs


@dataclass(frozen=True)
class CurveSpec:
    family: str
    params: tuple = ()
    resolution: int = 4096

    def __post_init__(self):
        if self.resolution < 64:
            raise UsageError("--resolution must be at least 64")


def _split_args(text: str) -> list[str]:
    """Split on top-level commas (nested specs keep their parentheses)."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
            continue
        depth += (ch == "(") - (ch == ")")
        cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def parse_curve_spec(text: str, resolution: int = 4096) -> CurveSpec:
    m = re.fullmatch(r"\s*([a-z_0-9]+)\s*(?:\((.*)\))?\s*", text)
    if not m:
        raise UsageError(f"cannot parse curve spec {text!r}")
    name, args = m.group(1), m.group(2)
    params = tuple(_split_args(args)) if args else ()
    known = {f.split("(")[0] for f in FAMILIES}
    if name not in known:
        raise UsageError(f"unknown curve family {name!r}; choose from {', '.join(FAMILIES)}")
    return CurveSpec(name, params, resolution)


def _ints(spec: CurveSpec, n: int) -> list[int]:
    if len(spec.params) != n:
        raise UsageError(f"{spec.family} takes {n} integer parameter(s)")
    try:
        return [int(v) for v in spec.params]
    except ValueError:
        raise UsageError(f"{spec.family}: parameters must be integers") from None


def load_table(path, samples: int = 4096) -> Curve:
    """Read a curve table (see docs/formats.md)."""
    frame = None
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("frame"):
                frame = line.split()[1]
                continue
            rows.append([float(v) for v in line.split()])
    arr = np.array(rows, float)
    if arr.ndim != 2 or arr.shape[0] < 4 or arr.shape[1] < 3:
        raise UsageError(f"{path}: need at least 4 rows of 't coords...'")
    return table_curve(arr[:, 0], arr[:, 1:], frame=frame, legendrian=frame is not None,
                       samples=samples, name=f"table({path})")


def build_curve(spec: CurveSpec, theta: float = 0.0) -> Curve:
    n = spec.resolution
    f = spec.family
    if f == "unknot_front":
        return unknot_front(samples=n)
    if f == "torus_knot":
        p, q = _ints(spec, 2)
        return torus_knot(p, q, samples=max(n, 2048))
    if f == "stereographic_torus":
        p, q = _ints(spec, 2)
        return stereographic_torus_knot(p, q, samples=n)
    if f == "figure_eight":
        return figure_eight(samples=n)
    if f == "unknot_horizontal":
        return unknot_horizontal(samples=n)
    if f == "area_twist":
        m = _ints(spec, 1)[0] if spec.params else 64
        return area_twist(m)(theta)
    if f == "table":
        if len(spec.params) != 1:
            raise UsageError("table takes one file name")
        return load_table(spec.params[0], n)
    if f == "stabilized":
        if not spec.params:
            raise UsageError("stabilized needs a base curve")
        c = build_curve(parse_curve_spec(spec.params[0], n), theta)
        for s in spec.params[1:]:
            if s not in ("+", "-"):
                raise UsageError(f"stabilization signs are + or -, got {s!r}")
            c = stabilize(c, 1 if s == "+" else -1)
        return c
    if f == "double_stabilized":
        if len(spec.params) not in (1, 2):
            raise UsageError("double_stabilized takes a base curve and an optional location")
        c = build_curve(parse_curve_spec(spec.params[0], n), theta)
        loc = float(spec.params[1]) if len(spec.params) == 2 else None
        return double_stabilization(c, loc=loc).curve
    raise UsageError(f"unknown curve family {f!r}")


def family_of(spec: CurveSpec) -> CurveFamily | None:
    if spec.family == "area_twist":
        return area_twist(_ints(spec, 1)[0] if spec.params else 64)
    return None


# --------------------------------------------------------------------------
# reports


@dataclass
class Report:
    """Ordered entries ``name -> {"value": v, **provenance}``."""

    command: str
    inputs: dict = field(default_factory=dict)
    entries: dict = field(default_factory=dict)

    def add(self, name: str, value, **prov):
        if isinstance(value, (np.integer, np.bool_)):
            value = value.item()
        elif isinstance(value, np.floating):
            value = float(value)
        self.entries[name] = {"value": value, **prov}

    def to_dict(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "results": self.entries}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        return cls(d["command"], d["inputs"], d["results"])

    def to_text(self) -> str:
        lines = []
        for k, v in self.entries.items():
            prov = " ".join(f"{a}={b}" for a, b in v.items() if a != "value")
            val = v["value"]
            if isinstance(val, float):
                val = f"{val:.12g}"
            elif isinstance(val, bool):
                val = str(val).lower()
            lines.append(f"{k}={val}" + (f"  # {prov}" if prov else ""))
        return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# commands


def _curve_from_args(args) -> tuple[CurveSpec, Curve]:
    if args.file and args.curve:
        raise UsageError("give either --curve or --file, not both")
    if args.file:
        spec = CurveSpec("table", (args.file,), args.resolution)
    elif args.curve:
        spec = parse_curve_spec(args.curve, args.resolution)
    else:
        raise UsageError("a curve is required: --curve SPEC or --file TABLE")
    return spec, build_curve(spec, args.theta)


def _inputs(args, spec: CurveSpec) -> dict:
    d = {"curve": spec.family + (f"({','.join(spec.params)})" if spec.params else ""),
         "resolution": spec.resolution}
    if spec.family == "area_twist":
        d["theta"] = args.theta
    return d


def cmd_invariants(args, rep: Report):
    spec, c = _curve_from_args(args)
    rep.inputs = _inputs(args, spec)
    n = spec.resolution
    rep.add("frame", str(c.frame))
    if c.frame is None:
        tol = default_tol_pos(c) if args.tol_pos is None else args.tol_pos
        dp = find_self_intersections(c, n, tol)
        rep.add("legendrian", False)
        rep.add("double_points", len(dp), resolution=n, tol_pos=tol)
        return
    if c.frame == ENGEL:
        res = horizontal_residual(c)
        rep.add("horizontal_residual", res, resolution=n, tol_leg=args.tol_leg)
        rep.add("rot", horizontal_rotation_number(c), resolution=n)
        g = geiges_project(c, args.tol_leg)
        rep.add("total_area", total_area(g, n), resolution=n)
    else:
        g = c
        res = legendrian_residual(c)
        rep.add("legendrian_residual", res, resolution=n, tol_leg=args.tol_leg)
        if res > args.tol_leg:
            rep.add("legendrian", False)
            return
        rep.add("rot", rotation_number(c, n), resolution=n)
    tol = default_tol_pos(g) if args.tol_pos is None else args.tol_pos
    dp = find_self_intersections(g, n, tol)
    rep.add("double_points", len(dp), resolution=n, tol_pos=tol)
    if dp:
        rep.add("embedded", False)
        return
    d = front_diagram(g, n)
    tb = thurston_bennequin(d)
    rep.add("cusps", len(d.cusps), resolution=n)
    rep.add("crossings", len(d.crossings), resolution=n)
    rep.add("writhe", d.writhe, resolution=n)
    rep.add("tb", tb, resolution=n)
    if args.oracle:
        rep.add("tb_linking_oracle", tb_linking_oracle(g, min(n, 1024)), resolution=min(n, 1024))
    rot = rep.entries["rot"]["value"]
    rep.add("tb_plus_rot_odd", (tb + rot) % 2 == 1)


def _reports(c: Curve, n: int, tol_pos):
    g = geiges_project(c) if c.frame == ENGEL else c
    tol = default_tol_pos(g) if tol_pos is None else tol_pos
    return [area_at_tangency(g, s) for s in find_self_intersections(g, n, tol)], tol


def cmd_tangencies(args, rep: Report):
    spec, c = _curve_from_args(args)
    rep.inputs = _inputs(args, spec)
    n = spec.resolution
    reports, tol = _reports(c, n, args.tol_pos)
    rep.add("count", len(reports), resolution=n, tol_pos=tol)
    for k, r in enumerate(reports):
        s = r.intersection
        rep.add(f"tangency{k}.t", [s.t0, s.t1], resolution=n)
        rep.add(f"tangency{k}.point", list(s.point), residual=s.residual)
        rep.add(f"tangency{k}.epsilon_A", r.epsilon_A, resolution=n)
        rep.add(f"tangency{k}.framing_sign", r.framing_sign)
        rep.add(f"tangency{k}.delta", r.delta)


def cmd_lift(args, rep: Report):
    spec, c = _curve_from_args(args)
    rep.inputs = _inputs(args, spec)
    n = spec.resolution
    lift = lift_horizontal(c, tol_area=args.tol_area, n=n)
    reps = lift.meta["tangencies"]
    rep.add("total_area", total_area(geiges_project(lift), n), resolution=n,
            tol_area=args.tol_area)
    rep.add("horizontal_residual", horizontal_residual(lift), resolution=n)
    rep.add("double_points", len(reps), resolution=n)
    if reps:
        rep.add("min_abs_epsilon_A", min(abs(r.epsilon_A) for r in reps), resolution=n)
    rep.add("embedded", bool(lift.meta["embedded"]), tol_area=args.tol_area)
    rep.add("rot", horizontal_rotation_number(lift), resolution=n)


def cmd_area(args, rep: Report):
    spec, c = _curve_from_args(args)
    rep.inputs = _inputs(args, spec)
    n = spec.resolution
    g = geiges_project(c, args.tol_leg) if c.frame == ENGEL else c
    a = total_area(g, n)
    rep.add("total_area", a, resolution=n, tol_area=args.tol_area)
    rep.add("zero_area", abs(a) < args.tol_area, tol_area=args.tol_area)
    fam = family_of(spec)
    if fam is not None:
        worst = max(abs(total_area(geiges_project(fam(th)), n)) for th in fam.thetas())
        rep.add("family_max_abs_area", worst, resolution=n, theta_samples=fam.theta_samples)


def _disk_from_args(args):
    if args.builtin and args.file:
        raise UsageError("give either --file or --builtin, not both")
    if args.builtin:
        if args.builtin != "area_twist":
            raise UsageError("the only builtin disk is area_twist")
        return diskcalc.area_twist_disk(), "builtin:area_twist"
    if not args.file:
        raise UsageError("a disk diagram is required: --file PATH or --builtin area_twist")
    return diskcalc.load_disk(args.file), args.file


def cmd_disk(args, rep: Report):
    d, src = _disk_from_args(args)
    rep.inputs = {"disk": src, "action": args.action}
    if args.action == "area":
        rep.add("Area", diskcalc.area_invariant(d))
        rep.add("plus_points", diskcalc.plus_points(d))
        rep.add("cusps", diskcalc.total_cusps(d))
    elif args.action == "obstructed":
        rep.add("obstructed", diskcalc.obstructed_curves(d))
        rep.add("min_zero_parity", diskcalc.min_zero_parity(d))
    elif args.action == "validate":
        rep.add("valid", True)
        rep.add("curves", len(d.curves))
    elif args.action == "moves":
        for move in diskcalc.MOVES:
            rep.add(move, len(diskcalc.applicable_sites(d, move)))
    elif args.action == "show":
        rep.add("diagram", diskcalc.format_disk(d).strip())


def resolve_map(name: str) -> deg.SphereMap:
    if name in deg.BUILTIN_MAPS:
        return deg.BUILTIN_MAPS[name]()
    m = re.fullmatch(r"(suspension|power|kalman)\((.*)\)", name)
    if not m:
        raise UsageError(f"unknown map {name!r}; choose from {', '.join(MAPS)}")
    args = _split_args(m.group(2))
    try:
        if m.group(1) == "suspension":
            return deg.suspension_s2(int(args[0]))
        if m.group(1) == "power":
            return deg.power_circle(int(args[0]))
        p, q, alpha = (int(v) for v in args[:3])
        t0 = float(args[3]) if len(args) > 3 else 0.1
    except (ValueError, IndexError):
        raise UsageError(f"bad parameters in {name!r}") from None
    return deg.kalman_obstruction_sphere(p, q, alpha, t0)


def cmd_degree(args, rep: Report):
    rep.inputs = {"map": args.map, "grid": args.grid}
    if args.map.endswith(".npy"):
        r = deg.degree_s2_table(np.load(args.map))
        rep.add("degree", r.degree, grid=r.grid, tol_round=deg.ROUND_TOL)
        rep.add("raw", r.raw, grid=r.grid)
        rep.add("defect", r.defect, grid=r.grid)
        return
    f = resolve_map(args.map)
    rep.add("domain", f.domain)
    if f.domain == "circle":
        n = args.grid or 256
        rep.add("degree", deg.winding_number(f, n), grid=n)
        return
    if f.domain == "sphere2":
        r = deg.degree_s2_result(f, args.grid)
    else:
        r = deg.degree_3_to_s3_result(f, args.grid)
    rep.add("degree", r.degree, grid=r.grid, tol_round=deg.ROUND_TOL)
    rep.add("raw", r.raw, grid=r.grid)
    rep.add("defect", r.defect, grid=r.grid)
    if args.oracle and f.domain == "sphere2":
        q = np.array([0.3, -0.5, 0.81])
        rep.add("regular_value_degree", deg.degree_regular_value(f, q / np.linalg.norm(q)),
                grid=64)


def cmd_kalman(args, rep: Report):
    grid = args.grid or 256
    rep.inputs = {"p": args.p, "q": args.q, "alpha": args.alpha, "t0": args.t0, "grid": grid}
    r = deg.kalman_degree(args.p, args.q, args.alpha, args.t0, grid)
    rep.add("raw", r.raw, grid=r.grid)
    rep.add("degree", r.degree, grid=r.grid, tol_round=deg.ROUND_TOL)
    rep.add("defect", r.defect, grid=r.grid)


def cmd_render(args, rep: Report):
    if not args.svg_out:
        raise UsageError("render needs --svg-out PATH")
    if args.disk or args.builtin:
        args.file = args.disk
        d, src = _disk_from_args(args)
        text = disk_svg(d)
        rep.inputs = {"disk": src}
    else:
        spec, c = _curve_from_args(args)
        rep.inputs = _inputs(args, spec)
        text = front_svg(c)
    write_svg(text, args.svg_out)
    rep.add("svg", args.svg_out)
    rep.add("bytes", len(text.encode("utf-8")))


def cmd_selftest(args, rep: Report):
    only = None
    if args.only:
        try:
            only = {int(v) for v in args.only.split(",")}
        except ValueError:
            raise UsageError("--only takes comma-separated criterion numbers") from None
        if not only <= set(range(1, len(CHECKS) + 1)):
            raise UsageError(f"criteria are numbered 1..{len(CHECKS)}")
    rep.inputs = {"only": sorted(only) if only else "all"}
    passed = failed = 0
    for k, fn in enumerate(CHECKS, 1):
        if only and k not in only:
            continue
        seeded = "seed" in inspect.signature(fn).parameters
        chk = fn(seed=args.seed) if seeded else fn()
        if not args.json:
            print(chk.line(), flush=True)
        rep.add(f"criterion{k}", chk.passed, detail=chk.detail)
        passed += chk.passed
        failed += not chk.passed
    rep.add("passed", passed)
    rep.add("failed", failed)
    return 0 if failed == 0 else 1


# --------------------------------------------------------------------------
# parser


def _curve_flags(p):
    p.add_argument("--curve", help="curve spec, one of: " + ", ".join(FAMILIES))
    p.add_argument("--file", help="curve table file (see docs/formats.md)")
    p.add_argument("--resolution", type=int, default=4096,
                   help="sample count for scans and quadrature (default 4096, min 64)")
    p.add_argument("--theta", type=float, default=0.0,
                   help="slice of a loop family such as area_twist (default 0)")
    p.add_argument("--tol-leg", type=float, default=TOL_LEG,
                   help=f"Legendrian/horizontal residual tolerance (default {TOL_LEG:g})")
    p.add_argument("--tol-area", type=float, default=TOL_AREA,
                   help=f"zero-area and embedding tolerance (default {TOL_AREA:g})")
    p.add_argument("--tol-pos", type=float, default=None,
                   help="double-point position tolerance (default: scaled to the curve)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the JSON report")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for randomized commands (default 0)")
    ap = argparse.ArgumentParser(prog="engelkit",
                                 description="Legendrian and Engel curve invariants.")
    sub = ap.add_subparsers(dest="command", required=True, metavar="command")

    for name, helptext in [("invariants", "rot, tb and front data of a curve"),
                           ("tangencies", "double points with their area function"),
                           ("lift", "horizontal lift and its embedding certificate"),
                           ("area", "total front area")]:
        p = sub.add_parser(name, help=helptext, parents=[common])
        _curve_flags(p)
        if name == "invariants":
            p.add_argument("--oracle", action="store_true",
                           help="also compute tb by the linking-number oracle")

    p = sub.add_parser("disk", help="disk-calculus evaluation", parents=[common])
    p.add_argument("action", choices=["area", "obstructed", "validate", "moves", "show"])
    p.add_argument("--file", help=".disk diagram file")
    p.add_argument("--builtin", help="builtin diagram: area_twist")

    p = sub.add_parser("degree", help="mapping degree of a builtin or tabulated map",
                       parents=[common])
    p.add_argument("--map", required=True, help="one of: " + ", ".join(MAPS))
    p.add_argument("--grid", type=int, default=None, help="quadrature grid (default per domain)")
    p.add_argument("--oracle", action="store_true", help="add a regular-value count (S^2 only)")

    p = sub.add_parser("kalman", help="degree of the torus-knot obstruction sphere",
                       parents=[common])
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--t0", type=float, default=0.1, help="base time on the knot (default 0.1)")
    p.add_argument("--grid", type=int, default=256, help="polar grid size (default 256)")

    p = sub.add_parser("render", help="write an SVG of a front or disk diagram",
                       parents=[common])
    _curve_flags(p)
    p.add_argument("--disk", help=".disk diagram file")
    p.add_argument("--builtin", help="builtin diagram: area_twist")
    p.add_argument("--svg-out", help="output SVG path")

    p = sub.add_parser("selftest", help="run the acceptance checks", parents=[common])
    p.add_argument("--only", help="comma-separated criterion numbers")
    ap.commands = sub.choices
    return ap


COMMANDS = {"invariants": cmd_invariants, "tangencies": cmd_tangencies, "lift": cmd_lift,
            "area": cmd_area, "disk": cmd_disk, "degree": cmd_degree, "kalman": cmd_kalman,
            "render": cmd_render, "selftest": cmd_selftest}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    rep = Report(args.command)
    try:
        code = COMMANDS[args.command](args, rep) or 0
    except UsageError as e:
        sys.stderr.write(ap.commands[args.command].format_usage())
        sys.stderr.write(f"usage error: {e}\n")
        return 2
    except EngelkitError as e:
        sys.stderr.write(f"{type(e).__name__}: {e}\n")
        return 1
    except (OSError, ValueError) as e:
        sys.stderr.write(f"{type(e).__name__}: {e}\n")
        return 1
    out.write(rep.to_json() + "\n" if args.json else rep.to_text())
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
