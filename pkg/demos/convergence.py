"""Mesh refinement for the two oracle domains.

The unit square has ``lambda = 2 pi^2`` and a torsion known from a rapidly
converging series.  The unit disk has ``lambda = j0^2`` and torsion
``pi / 8``.  Halving the grid spacing should cut the error by about four.

    python demos/convergence.py
"""
import math

from steinerflow.diagram import J0
from steinerflow.pde import eigen_solve, rasterize_polygon, torsion_solve
from steinerflow.shapes import disk, rectangle

T_SQUARE = 0.03514425373836069


def main() -> None:
    cases = [
        ("square", rectangle(0, 0, 1, 1), 2 * math.pi ** 2, T_SQUARE, 1.0),
        ("disk", disk(1024), J0 ** 2, math.pi / 8, 2.0),
    ]
    for name, p, lam_ref, t_ref, diam in cases:
        print(f"{name}: lambda = {lam_ref:.10f}, T = {t_ref:.10f}")
        print(f"{'nodes/diam':>10} {'lambda err':>12} {'order':>6} {'T err':>12} {'order':>6}")
        prev = None
        for n in (16, 32, 64, 128):
            g = rasterize_polygon(p, diam / n)
            el = abs(eigen_solve(g)[0] - lam_ref) / lam_ref
            et = abs(torsion_solve(g)[0] - t_ref) / t_ref
            ol = f"{math.log2(prev[0] / el):6.2f}" if prev else " " * 6
            ot = f"{math.log2(prev[1] / et):6.2f}" if prev else " " * 6
            print(f"{n:>10} {el:12.3e} {ol} {et:12.3e} {ot}")
            prev = (el, et)
        print()


if __name__ == "__main__":
    main()
