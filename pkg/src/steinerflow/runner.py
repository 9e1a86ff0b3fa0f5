"""PDE evaluation of flow snapshots: solving, wall confirmation and monotonicity checks."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .geometry import Polygon, StripDomain
from .pde import SolverError, eigen_solve, rasterize, torsion_solve
from .symflow import (
    EPS_JUMP,
    FlowPlan,
    FlowSchedule,
    FlowSnapshot,
    default_spacing,
    plan_schedule,
    run_schedule,
)

__all__ = [
    "max_threads",
    "solve_domain",
    "wall_confirmer",
    "torsion_profile",
    "solve_snapshots",
    "solve_flow",
    "MonotoneReport",
    "check_monotone",
]

log = logging.getLogger(__name__)


def max_threads() -> int:
    """Worker count, capped by ``STEINERFLOW_THREADS`` when set."""
    n = os.cpu_count() or 1
    env = os.environ.get("STEINERFLOW_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            log.warning("ignoring non-integer STEINERFLOW_THREADS=%r", env)
    return n


def solve_domain(
    dom: StripDomain, h: float, cg_tol: float = 1e-10, eig_tol: float = 1e-8, wall_mode: str = "cut"
) -> tuple[float, float]:
    """Principal eigenvalue and torsional rigidity of a strip domain on a lattice of spacing ``h``."""
    g = rasterize(dom, h, wall_mode=wall_mode)
    tor, _ = torsion_solve(g, cg_tol)
    lam, _ = eigen_solve(g, eig_tol)
    return lam, tor


def wall_confirmer(h: float, cg_tol: float = 1e-10, eps_jump: float = EPS_JUMP, wall_mode: str = "cut"):
    """Callback for ``plan_schedule`` keeping walls whose torsion gap exceeds ``eps_jump * T``."""

    def confirm(plus: StripDomain, wall) -> bool:
        t_plus, _ = torsion_solve(rasterize(plus, h, wall_mode=wall_mode), cg_tol)
        g_wall = rasterize(plus.with_walls((wall,)), h, wall_mode=wall_mode)
        t_wall, _ = torsion_solve(g_wall, cg_tol)
        gap = t_plus - t_wall
        log.debug("wall at x=%.6g strips %d..%d: torsion gap %.3e", wall.x, wall.strip_lo, wall.strip_hi, gap)
        return gap > eps_jump * t_plus

    return confirm


def torsion_profile(
    h: float, cg_tol: float = 1e-10, n_linear: int = 16, max_gain: float = 0.02, max_solves: int = 96,
    wall_mode: str = "cut",
):
    """Shrink profile that spends equal time per unit of torsion gained.

    For nested sets the torsion gap is the L1 distance of torsion functions,
    so this is an arclength parametrization of the shrink in that metric.  A
    linear shrink crowds most of the change into the last instants, because
    a short slit still blocks a lot of flux.  Knots start on a uniform eta
    grid and are bisected until no interval carries more than ``max_gain``
    of the total torsion gain.
    """

    def profile(plus: StripDomain, walls) -> tuple[np.ndarray, np.ndarray]:
        bbox = plus.bbox()
        cache: dict[float, float] = {}

        def tor(e: float) -> float:
            if e not in cache:
                ws = tuple(replace(w, eta=e) for w in walls) if e < 1.0 else ()
                g = rasterize(plus.with_walls(ws), h, bbox=bbox, wall_mode=wall_mode)
                cache[e] = torsion_solve(g, cg_tol)[0]
            return cache[e]

        eta = [float(e) for e in np.linspace(0.0, 1.0, n_linear + 1)]
        for e in eta:
            tor(e)
        while len(cache) < max_solves:
            t = np.maximum.accumulate([cache[e] for e in eta])
            gain = t[-1] - t[0]
            if not gain > 0:
                break
            du = np.diff(t) / gain
            k = int(np.argmax(du))
            if du[k] <= max_gain:
                break
            mid = 0.5 * (eta[k] + eta[k + 1])
            tor(mid)
            eta.insert(k + 1, mid)
        t = np.maximum.accumulate([cache[e] for e in eta])
        gain = t[-1] - t[0]
        if not gain > 0:
            return np.array([0.0, 1.0]), np.array([0.0, 1.0])
        u = (t - t[0]) / gain
        u[-1] = 1.0
        return u, np.array(eta)

    return profile


def solve_snapshots(
    snaps: Sequence[FlowSnapshot],
    h: float,
    cg_tol: float = 1e-10,
    eig_tol: float = 1e-8,
    wall_mode: str = "cut",
    threads: int | None = None,
    strict: bool = True,
) -> list[FlowSnapshot]:
    """Attach eigenvalue and torsion to every snapshot, in input order.

    With ``strict=False`` a failed solve leaves ``lam`` and ``torsion`` unset
    and the remaining snapshots are still evaluated.
    """

    def work(s: FlowSnapshot) -> FlowSnapshot:
        try:
            lam, tor = solve_domain(s.domain, h, cg_tol, eig_tol, wall_mode)
        except SolverError as exc:
            if strict:
                raise
            log.error("snapshot t=%.4f failed: %s", s.t_global, exc)
            return s
        return replace(s, lam=lam, torsion=tor)

    threads = threads or max_threads()
    if threads <= 1 or len(snaps) <= 1:
        return [work(s) for s in snaps]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(work, snaps))


def solve_flow(
    p: Polygon,
    sched: FlowSchedule,
    samples: int = 40,
    n_strips: int = 256,
    resolution: int = 128,
    h: float | None = None,
    cg_tol: float = 1e-10,
    eig_tol: float = 1e-8,
    modified: bool = True,
    confirm_walls: bool = True,
    equal_torsion_shrink: bool = True,
    wall_mode: str = "cut",
    threads: int | None = None,
    strict: bool = True,
    plan: FlowPlan | None = None,
) -> list[FlowSnapshot]:
    """Run the flow of ``p`` and solve both PDEs at every snapshot.

    Walls are confirmed by their torsion gap before a shrink phase is
    inserted unless ``confirm_walls`` is false.  Shrinks follow
    ``torsion_profile`` unless ``equal_torsion_shrink`` is false, in which
    case the removed wall fraction grows linearly.
    """
    h = h or default_spacing(p, resolution)
    if plan is None:
        confirm = wall_confirmer(h, cg_tol, wall_mode=wall_mode) if (modified and confirm_walls) else None
        profile = torsion_profile(h, cg_tol, wall_mode=wall_mode) if (modified and equal_torsion_shrink) else None
        plan = plan_schedule(p, sched, n_strips, modified, confirm, profile)
    snaps = run_schedule(p, sched, samples, n_strips, modified, plan=plan)
    return solve_snapshots(snaps, h, cg_tol, eig_tol, wall_mode, threads, strict)


@dataclass(frozen=True)
class MonotoneReport:
    max_lambda_increase: float  # relative, worst single step
    max_torsion_decrease: float
    max_area_drift: float
    rtol: float

    @property
    def passed(self) -> bool:
        return self.max_lambda_increase <= self.rtol and self.max_torsion_decrease <= self.rtol


def check_monotone(snaps: Sequence[FlowSnapshot], rtol: float = 0.01) -> MonotoneReport:
    """Worst per-step violation of lambda non-increasing and torsion non-decreasing."""
    lam = np.array([s.lam for s in snaps], dtype=float)
    tor = np.array([s.torsion for s in snaps], dtype=float)
    area = np.array([s.area for s in snaps], dtype=float)
    if np.isnan(lam).any() or np.isnan(tor).any():
        raise ValueError("snapshots have not been solved")
    up = np.max(np.diff(lam) / lam[:-1], initial=0.0)
    down = np.max(-np.diff(tor) / tor[:-1], initial=0.0)
    drift = float(np.max(np.abs(area - area[0])) / area[0])
    return MonotoneReport(max(float(up), 0.0), max(float(down), 0.0), drift, rtol)
