"""Command-line interface: ``steinerflow <command> ...``.

Exit status is 0 when every requested check passes, 1 when a check fails
and 2 for usage errors (missing or unreadable input, unknown demo).
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

from . import shapes
from .diagram import PLANE, BallConstants, DiagramPoint, diagram_point, family_points, verify_point
from .fileio import (
    PolygonParseError,
    bounds_csv,
    diagram_csv,
    diagram_svg,
    read_polygon,
    snapshots_csv,
    strips_csv,
    write_polygon,
)
from .geometry import Direction, GeometryError, Polygon, area, steiner_symmetrize
from .pde import SolverError, eigen_solve, rasterize_polygon, torsion_solve
from .runner import check_monotone, solve_flow
from .symflow import DELTA_T, FlowError, FlowSchedule, _cluster, default_spacing

log = logging.getLogger("steinerflow")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class Config:
    grid_resolution: int = 128
    n_strips: int = 256
    directions: int = 8
    shrink_duration: float = 1.0
    horizon: float = 6.0
    samples: int = 40
    cg_tol: float = 1e-10
    eig_tol: float = 1e-8
    eps_disc: float = 0.03
    monotone_rtol: float = 0.01
    out: str | None = None
    svg: str | None = None

    def validate(self) -> "Config":
        if self.grid_resolution < 32:
            raise UsageError("grid_resolution must be at least 32")
        if self.n_strips < 8:
            raise UsageError("n_strips must be at least 8")
        for f in ("directions", "shrink_duration", "horizon", "samples", "cg_tol", "eig_tol", "eps_disc", "monotone_rtol"):
            if not getattr(self, f) > 0:
                raise UsageError(f"{f} must be positive")
        if self.samples < 2:
            raise UsageError("samples must be at least 2")
        return self


def load_config(path: str | Path | None, overrides: dict) -> Config:
    """Defaults, then ``key = value`` lines from ``path``, then non-None ``overrides``."""
    cfg = Config()
    types = {f.name: f.type for f in fields(Config)}
    values: dict = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"config file not found: {p}")
        for n, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{p}:{n}: expected key=value")
            k, v = (s.strip() for s in line.split("=", 1))
            if k not in types:
                raise UsageError(f"{p}:{n}: unknown key {k!r}")
            values[k] = v
    values.update({k: v for k, v in overrides.items() if v is not None and k in types})
    for k, v in values.items():
        t = types[k]
        try:
            if t in ("int", int):
                v = int(v)
            elif t in ("float", float):
                v = float(v)
            else:
                v = None if v in ("", None) else str(v)
        except ValueError:
            raise UsageError(f"bad value for {k}: {v!r}") from None
        setattr(cfg, k, v)
    return cfg.validate()


def _config(args) -> Config:
    over = {f.name: getattr(args, f.name, None) for f in fields(Config)}
    return load_config(getattr(args, "config", None), over)


def _load(path: str) -> Polygon:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {p}")
    try:
        return read_polygon(p)
    except PolygonParseError as exc:
        raise UsageError(str(exc)) from exc


def _input(args) -> tuple[str, Polygon]:
    if getattr(args, "demo", None):
        try:
            return args.demo, shapes.demo(args.demo)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if not args.input:
        raise UsageError("give an input polygon file or --demo NAME")
    return args.input, _load(args.input)


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_symmetrize(args) -> int:
    _, p = _input(args)
    dom = steiner_symmetrize(p, Direction(args.angle), args.strips)
    print(f"area before {area(p):.12g}", file=sys.stderr)
    print(f"area after  {dom.area:.12g}", file=sys.stderr)
    _emit(strips_csv(dom), args.out)
    return EXIT_OK


def _schedule(cfg: Config, angle: float | None) -> FlowSchedule:
    offset = 0.0 if angle is None else angle
    return FlowSchedule.uniform(cfg.directions, cfg.horizon, cfg.shrink_duration, offset)


def _event_log(snaps) -> list[str]:
    lines = []
    events = [e for s in snaps for e in s.events]
    merges = [e for e in events if e.kind == "merge"]
    by_phase: dict[int, list] = {}
    for e in merges:
        by_phase.setdefault(e.phase, []).append(e)
    for k in sorted(by_phase):
        evs = by_phase[k]
        for grp in _cluster([e.flow_time for e in evs], DELTA_T):
            g = [evs[i] for i in grp]
            lo, hi = min(e.strip_lo for e in g), max(e.strip_hi for e in g)
            lines.append(
                f"merge      phase {k}  t_global {g[0].t_global:.6f}  flow_time {g[0].flow_time:.6f}  "
                f"strips {lo}..{hi} ({len(g)} merges)"
            )
    for e in events:
        if e.kind != "merge":
            lines.append(
                f"{e.kind:<10} phase {e.phase}  t_global {e.t_global:.6f}  flow_time {e.flow_time:.6f}  "
                f"strips {e.strip_lo}..{e.strip_hi}  x {e.x:.6g}"
            )
    return sorted(lines, key=lambda s: float(s.split("t_global")[1].split()[0]))


def cmd_flow(args) -> int:
    cfg = _config(args)
    name, p = _input(args)
    sched = _schedule(cfg, args.angle)
    snaps = solve_flow(
        p, sched, samples=cfg.samples, n_strips=cfg.n_strips, resolution=cfg.grid_resolution,
        cg_tol=cfg.cg_tol, eig_tol=cfg.eig_tol, modified=not args.unmodified, strict=False,
    )
    for line in _event_log(snaps):
        print(line)
    _emit(snapshots_csv(snaps), cfg.out)
    failed = [s for s in snaps if s.lam is None or s.torsion is None]
    for s in failed:
        print(f"solver failure at t_global {s.t_global:.6f}", file=sys.stderr)
    if failed:
        print("monotonicity FAIL (unsolved snapshots)")
        return EXIT_FAIL
    rep = check_monotone(snaps, cfg.monotone_rtol)
    status = "PASS" if rep.passed else "FAIL"
    print(
        f"monotonicity {status}: worst lambda increase {rep.max_lambda_increase:.3e}, "
        f"worst torsion decrease {rep.max_torsion_decrease:.3e}, area drift {rep.max_area_drift:.1e}"
    )
    return EXIT_OK if rep.passed else EXIT_FAIL


def _scan_file(p: Polygon, cfg: Config, n_list) -> list[DiagramPoint]:
    snaps = solve_flow(
        p, _schedule(cfg, None), samples=cfg.samples, n_strips=cfg.n_strips, resolution=cfg.grid_resolution,
        cg_tol=cfg.cg_tol, eig_tol=cfg.eig_tol,
    )
    pts = []
    for s in snaps:
        base = diagram_point(s.lam, s.torsion, s.area, PLANE, t_global=s.t_global)
        pts.append(base)
        pts.extend(family_points(base, n_list))
    return pts


def cmd_diagram(args) -> int:
    cfg = _config(args)
    root = Path(args.corpus)
    if not root.is_dir():
        raise UsageError(f"no such directory: {root}")
    files = sorted(f for f in root.iterdir() if f.is_file() and not f.name.startswith("."))
    all_pts: list[DiagramPoint] = []
    ok = True
    print(f"{'file':<28} {'points':>6} {'failures':>8} {'x_max':>8} {'y_max':>8}")
    for f in files:
        try:
            pts = _scan_file(read_polygon(f), cfg, args.n)
        except (PolygonParseError, GeometryError, FlowError, SolverError) as exc:
            print(f"{f.name:<28} error: {exc}")
            ok = False
            continue
        bad = [q for q in pts if not verify_point(q, PLANE, cfg.eps_disc).passed]
        ok &= not bad
        comp = [q for q in pts if q.source == "computed"]
        print(
            f"{f.name:<28} {len(pts):>6} {len(bad):>8} {max(q.x for q in comp):>8.4f} {max(q.y for q in comp):>8.4f}"
        )
        all_pts.extend(pts)
    _emit(diagram_csv(all_pts), cfg.out)
    if cfg.svg:
        Path(cfg.svg).write_text(diagram_svg(all_pts, title="flow and family curves"), encoding="utf-8")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bounds(args) -> int:
    if args.samples < 2:
        raise UsageError("samples must be at least 2")
    c = BallConstants.for_dimension(args.d, args.lambda_ball)
    _emit(bounds_csv(args.d, args.samples, c), args.out)
    if args.svg:
        Path(args.svg).write_text(diagram_svg((), args.d, c, title=f"bounds, d={args.d}"), encoding="utf-8")
    return EXIT_OK


def cmd_verify(args) -> int:
    """Solve each polygon directly and check its diagram point against every bound."""
    cfg = _config(args)
    ok = True
    print(f"{'file':<28} {'x':>8} {'y':>8}  result")
    for path in args.inputs:
        p = _load(path)
        g = rasterize_polygon(p, default_spacing(p, cfg.grid_resolution))
        try:
            tor, _ = torsion_solve(g, cfg.cg_tol)
            lam, _ = eigen_solve(g, cfg.eig_tol)
        except SolverError as exc:
            print(f"{Path(path).name:<28} solver error: {exc}")
            ok = False
            continue
        pt = diagram_point(lam, tor, area(p))
        rep = verify_point(pt, PLANE, cfg.eps_disc)
        ok &= rep.passed
        res = "PASS" if rep.passed else "FAIL " + ",".join(rep.failures())
        print(f"{Path(path).name:<28} {pt.x:>8.4f} {pt.y:>8.4f}  {res}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_demo(args) -> int:
    try:
        p = shapes.demo(args.name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    out = args.out or f"{args.name}.poly"
    write_polygon(out, p, f"demo {args.name}, area {area(p):.17g}")
    print(f"wrote {out}: area {area(p):.12g}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_config(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key=value file; flags override it")
    sp.add_argument("--resolution", dest="grid_resolution", type=int, help="grid nodes across the diameter (128)")
    sp.add_argument("--strips", dest="n_strips", type=int, help="number of strips (256)")
    sp.add_argument("--directions", type=int, help="symmetrization directions (8)")
    sp.add_argument("--horizon", type=float, help="flow time per direction (6)")
    sp.add_argument("--shrink", dest="shrink_duration", type=float, help="duration of each wall shrink (1)")
    sp.add_argument("--samples", type=int, help="snapshots in [0, 1] (40)")
    sp.add_argument("--cg-tol", dest="cg_tol", type=float)
    sp.add_argument("--eig-tol", dest="eig_tol", type=float)
    sp.add_argument("--eps", dest="eps_disc", type=float, help="slack for inequality checks (0.03)")
    sp.add_argument("-o", "--out", help="output CSV (stdout if omitted)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steinerflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("symmetrize", help="Steiner symmetral of a polygon as a strip CSV")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--demo")
    sp.add_argument("--angle", type=float, default=0.0)
    sp.add_argument("--strips", type=int, default=256)
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_symmetrize)

    sp = sub.add_parser("flow", help="continuous symmetrization with eigenvalue and torsion per snapshot")
    sp.add_argument("input", nargs="?")
    sp.add_argument("--demo")
    sp.add_argument("--angle", type=float, help="angle of the first direction (0)")
    sp.add_argument("--unmodified", action="store_true", help="do not shrink walls")
    _add_config(sp)
    sp.set_defaults(func=cmd_flow)

    sp = sub.add_parser("diagram", help="diagram scan over a directory of polygon files")
    sp.add_argument("corpus")
    sp.add_argument("--n", type=int, nargs="+", default=[2, 3, 5], help="family indices")
    sp.add_argument("--svg")
    _add_config(sp)
    sp.set_defaults(func=cmd_diagram)

    sp = sub.add_parser("bounds", help="closed-form bound curves on [0, 1]")
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--lambda-ball", dest="lambda_ball", type=float)
    sp.add_argument("--samples", type=int, default=101)
    sp.add_argument("--svg")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("verify", help="check polygons against the diagram inequalities")
    sp.add_argument("inputs", nargs="+")
    _add_config(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("demo", help="write a built-in polygon")
    sp.add_argument("name")
    sp.add_argument("-o", "--out")
    sp.set_defaults(func=cmd_demo)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"steinerflow: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeometryError, FlowError, ValueError) as exc:
        print(f"steinerflow: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
