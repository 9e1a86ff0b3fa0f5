"""Blaschke-Santalo coordinates for (eigenvalue, torsion) and the curves bounding them.

A domain maps to ``x = |B|^(2/d) lam(B) / (|O|^(2/d) lam(O))`` and
``y = |B|^((d+2)/d) T(O) / (|O|^((d+2)/d) T(B))`` with ``B`` the unit ball,
so balls sit at ``(1, 1)`` and every domain lands in the unit square.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "J0",
    "BallConstants",
    "DiagramPoint",
    "PointReport",
    "diagram_point",
    "kj_lower",
    "bfnt_upper",
    "h_lower",
    "polya_coeff",
    "family_curve",
    "family_values",
    "verify_point",
    "diagram_scan",
]

# first positive zero of the Bessel function J0
J0 = 2.404825557695773


@dataclass(frozen=True)
class BallConstants:
    d: int
    lambda_ball: float
    torsion_ball: float
    volume_ball: float

    def __post_init__(self):
        if self.d < 1 or min(self.lambda_ball, self.torsion_ball, self.volume_ball) <= 0:
            raise ValueError("ball constants must be positive")

    @classmethod
    def for_dimension(cls, d: int, lambda_ball: float | None = None) -> "BallConstants":
        """Unit-ball constants.  ``lambda_ball`` is built in only for d = 2 and d = 3."""
        if lambda_ball is None:
            builtin = {2: J0 ** 2, 3: math.pi ** 2}
            if d not in builtin:
                raise ValueError(f"no built-in unit-ball eigenvalue for d={d}; pass lambda_ball")
            lambda_ball = builtin[d]
        omega = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        return cls(d, float(lambda_ball), omega / (d * (d + 2)), omega)


PLANE = BallConstants.for_dimension(2)


@dataclass(frozen=True)
class DiagramPoint:
    x: float
    y: float
    d: int = 2
    source: str = "computed"  # computed | analytic-family | bound-curve
    t_global: float | None = None
    n: int | None = None
    flags: tuple[str, ...] = ()

    def distance_to_ball(self) -> float:
        return math.hypot(1.0 - self.x, 1.0 - self.y)


def diagram_point(
    lam: float,
    torsion: float,
    area: float,
    c: BallConstants = PLANE,
    source: str = "computed",
    eps: float = 1e-9,
    **meta,
) -> DiagramPoint:
    """Scale-free coordinates of a domain with eigenvalue ``lam``, torsion and measure ``area``.

    Points beyond ``1 + eps`` in either coordinate break Faber-Krahn or
    Saint-Venant; they are returned with ``flags`` set, which usually means
    the solver was under-resolved.
    """
    if min(lam, torsion, area) <= 0:
        raise ValueError("eigenvalue, torsion and area must be positive")
    d = c.d
    ratio = c.volume_ball / area
    x = ratio ** (2 / d) * c.lambda_ball / lam
    y = ratio ** ((d + 2) / d) * torsion / c.torsion_ball
    flags = []
    if x > 1 + eps:
        flags.append("faber_krahn")
    if y > 1 + eps:
        flags.append("saint_venant")
    return DiagramPoint(x, y, d, source, flags=tuple(flags), **meta)


def kj_lower(x, d: int = 2):
    """Kohler-Jobin lower boundary ``x^((d+2)/2)``."""
    return np.power(x, (d + 2) / 2)


def bfnt_upper(x, c: BallConstants = PLANE):
    """Upper bound ``x d (d+2)^2 / (2 x d + (d+2) lam(B))``; for d = 2 it is ``8x / (x + j0^2)``."""
    d = c.d
    x = np.asarray(x, dtype=float)
    out = x * d * (d + 2) ** 2 / (2 * x * d + (d + 2) * c.lambda_ball)
    return out if out.ndim else float(out)


def h_lower(x, d: int = 2):
    """Lower bound on the upper boundary: ``x^((d+2)/2) ([k] + frac(k)^((d+2)/d))`` with ``k = x^(-d/2)``.

    Extended by its limit 0 at ``x = 0``.
    """
    xa = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.power(xa, -d / 2)
        # snap k to an integer when rounding pushed it just below one
        kr = np.round(k)
        k = np.where(np.abs(k - kr) <= 1e-12 * np.maximum(kr, 1.0), kr, k)
        ip = np.floor(k)
        out = np.power(xa, (d + 2) / 2) * (ip + np.power(k - ip, (d + 2) / d))
    out = np.where(xa == 0, 0.0, out)
    return out if out.ndim else float(out)


def polya_coeff(c: BallConstants = PLANE) -> float:
    """Slope of the Polya line ``y < |B| x / (lam(B) T(B))``."""
    return c.volume_ball / (c.lambda_ball * c.torsion_ball)


def _shrink(n: int, d: int, sigma: float) -> float:
    if n < 2:
        raise ValueError("family index n must be at least 2")
    if not 0.0 <= sigma <= 1.0:
        raise ValueError("sigma must lie in [0, 1]")
    a_n = 1.0 - n ** (-1.0 / d)
    return 1.0 - a_n * sigma


def _bracket(q: float, n: int, d: int) -> float:
    return q ** (d + 2) + (n - 1) ** (-2.0 / d) * (1.0 - q ** d) ** ((d + 2) / d)


def family_curve(x0: float, y0: float, n: int, d: int = 2, sigma: float = 0.0) -> tuple[float, float]:
    """Point ``sigma`` of the path from ``(x0, y0)`` obtained by splitting off ``n - 1`` small copies.

    At ``sigma = 0`` this is the starting point; at ``sigma = 1`` all ``n``
    copies are equal and the point is ``n^(-2/d) (x0, y0)``.
    """
    q = _shrink(n, d, sigma)
    return x0 * q ** 2, y0 * _bracket(q, n, d)


def family_values(lam: float, torsion: float, n: int, d: int = 2, sigma: float = 0.0) -> tuple[float, float]:
    """Eigenvalue and torsion of the measure-preserving n-piece family."""
    q = _shrink(n, d, sigma)
    return lam / q ** 2, torsion * _bracket(q, n, d)


@dataclass(frozen=True)
class PointReport:
    faber_krahn: bool
    saint_venant: bool
    kohler_jobin: bool
    bfnt: bool
    polya: bool
    h_lower_consistent: bool
    kohler_jobin_strict: bool = False

    @property
    def passed(self) -> bool:
        return all(
            (self.faber_krahn, self.saint_venant, self.kohler_jobin, self.bfnt, self.polya, self.h_lower_consistent)
        )

    def failures(self) -> list[str]:
        names = ("faber_krahn", "saint_venant", "kohler_jobin", "bfnt", "polya", "h_lower_consistent")
        return [n for n in names if not getattr(self, n)]


def verify_point(p: DiagramPoint, c: BallConstants | None = None, eps: float = 0.0) -> PointReport:
    """Check a point against every inequality that bounds the diagram."""
    c = c or BallConstants.for_dimension(p.d)
    kj = kj_lower(p.x, c.d)
    up = bfnt_upper(p.x, c)
    return PointReport(
        faber_krahn=p.x <= 1 + eps,
        saint_venant=p.y <= 1 + eps,
        kohler_jobin=p.y >= kj - eps,
        bfnt=p.y <= up + eps,
        polya=p.y <= polya_coeff(c) * p.x + eps,
        h_lower_consistent=bool(up >= h_lower(p.x, c.d) if p.x > 0 else True),
        kohler_jobin_strict=p.y > kj,
    )


def family_points(
    base: DiagramPoint, n_list: Iterable[int], n_sigma: int = 21
) -> list[DiagramPoint]:
    out = []
    for n in n_list:
        for sg in np.linspace(0.0, 1.0, n_sigma)[1:]:
            x, y = family_curve(base.x, base.y, n, base.d, float(sg))
            out.append(DiagramPoint(x, y, base.d, "analytic-family", None, n))
    return out


def diagram_scan(
    p,
    sched,
    n_list: Sequence[int] = (2, 3, 5),
    grid_h: float | None = None,
    samples: int = 40,
    n_sigma: int = 21,
    n_strips: int = 256,
    resolution: int = 128,
    eps: float = 0.03,
    cg_tol: float = 1e-10,
    eig_tol: float = 1e-8,
    modified: bool = True,
) -> list[DiagramPoint]:
    """Flow curve of ``p`` towards the ball plus the analytic families below each flow point.

    Raises ``ValueError`` if any emitted point fails ``verify_point`` at ``eps``.
    """
    from .runner import solve_flow

    snaps = solve_flow(
        p, sched, samples=samples, n_strips=n_strips, resolution=resolution, h=grid_h,
        cg_tol=cg_tol, eig_tol=eig_tol, modified=modified,
    )
    pts: list[DiagramPoint] = []
    for s in snaps:
        base = diagram_point(s.lam, s.torsion, s.area, PLANE, t_global=s.t_global)
        pts.append(base)
        pts.extend(family_points(base, n_list, n_sigma))
    bad = [q for q in pts if not verify_point(q, PLANE, eps).passed]
    if bad:
        raise ValueError(f"{len(bad)} scanned points violate the diagram bounds, first {bad[0]}")
    return pts
