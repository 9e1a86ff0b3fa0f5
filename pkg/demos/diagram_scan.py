"""Flow curves in the (eigenvalue, torsion) diagram.

Every snapshot of the modified flow maps to a point ``(x, y)`` of the unit
square.  The flow carries the point towards the ball at ``(1, 1)`` while
staying between the Kohler-Jobin curve below and the BFNT curve above.  From
each flow point, the analytic n-piece families trace paths down towards the
origin.

    python demos/diagram_scan.py [--resolution 96] [--out DIR]
"""
import argparse
from pathlib import Path

from steinerflow.diagram import PLANE, diagram_point, family_points, verify_point
from steinerflow.fileio import diagram_csv, diagram_svg
from steinerflow.runner import check_monotone, solve_flow
from steinerflow.shapes import lshape, ushape
from steinerflow.symflow import FlowSchedule


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolution", type=int, default=96)
    ap.add_argument("--samples", type=int, default=24)
    ap.add_argument("--out", type=Path, default=Path("demo_out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    pts = []
    for name, shape in (("L-shape", lshape), ("U-shape", ushape)):
        snaps = solve_flow(shape(), FlowSchedule.uniform(8), samples=args.samples, resolution=args.resolution)
        rep = check_monotone(snaps)
        flow = [diagram_point(s.lam, s.torsion, s.area, PLANE, t_global=s.t_global) for s in snaps]
        print(f"{name}: start ({flow[0].x:.3f}, {flow[0].y:.3f}), end ({flow[-1].x:.3f}, {flow[-1].y:.3f}), "
              f"distance to the ball {flow[-1].distance_to_ball():.4f}")
        print(f"  worst monotonicity violation {max(rep.max_lambda_increase, rep.max_torsion_decrease):.2e}")
        for p in flow:
            pts.append(p)
            pts.extend(family_points(p, (2, 3, 5), n_sigma=11))

    bad = [p for p in pts if not verify_point(p, PLANE, 0.03).passed]
    print(f"{len(pts)} points, {len(bad)} outside the known bounds")
    (args.out / "diagram.csv").write_text(diagram_csv(pts), encoding="utf-8")
    (args.out / "diagram.svg").write_text(diagram_svg(pts, title="flow curves and n-piece families"), encoding="utf-8")
    print(f"wrote {args.out}/diagram.csv and {args.out}/diagram.svg")


if __name__ == "__main__":
    main()
