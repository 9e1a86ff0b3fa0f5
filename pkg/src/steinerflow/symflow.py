"""Continuous Steiner symmetrization of strip domains.

Within one strip the flow is one-dimensional and exact: every interval keeps
its length while its midpoint decays like ``m0 * exp(-t)``; when two
neighbours touch they are fused and the fused interval continues under the
same law.  Strips evolve independently.

When a run of strips merges at the same instant and abscissa, the fused set
``Int(closure)`` gains a slit (a *wall*) all at once, which makes torsion and
eigenvalue jump.  The modified flow pauses the clock at such instants and
removes the wall gradually over ``shrink_duration`` units of time.
"""
from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .geometry import (
    Direction,
    GeometryError,
    IntervalSet,
    Polygon,
    StripDomain,
    WallSegment,
    diameter,
    slice_polygon,
)

log = logging.getLogger(__name__)

__all__ = [
    "FlowError",
    "StripDomain",
    "WallSegment",
    "MergeEvent",
    "FlowEvent",
    "FlowSchedule",
    "FlowSnapshot",
    "FlowPlan",
    "evolve_intervals",
    "next_merge_time",
    "merge_at",
    "strip_flow_to",
    "detect_walls",
    "shrink_wall",
    "reslice",
    "plan_schedule",
    "run_schedule",
    "W_MIN",
    "DELTA_T",
    "DELTA_X",
    "EPS_JUMP",
]

W_MIN = 3
DELTA_T = 1e-6
DELTA_X = 1e-6
EPS_JUMP = 1e-4
MERGE_TIME_TOL = 1e-12


class FlowError(RuntimeError):
    pass


@dataclass(frozen=True)
class MergeEvent:
    strip: int
    time: float
    x: float


# ---------------------------------------------------------------------------
# one strip


def _pair_times(m: np.ndarray, r: np.ndarray) -> np.ndarray:
    gap_m = np.diff(m)
    gap_r = r[:-1] + r[1:]
    return np.log(gap_m / gap_r)


def next_merge_time(s: IntervalSet) -> float:
    """Time until the first pair of neighbours touches, ``inf`` for one interval."""
    if len(s) < 2:
        return math.inf
    t = _pair_times(s.barycenters, s.radii)
    return float(max(t.min(), 0.0))


def _evolve(s: IntervalSet, t: float) -> IntervalSet:
    if t == 0.0:
        return s
    f = math.exp(-t)
    return IntervalSet._unchecked(
        tuple(((a + b) / 2 * f - (b - a) / 2, (a + b) / 2 * f + (b - a) / 2) for a, b in s)
    )


def evolve_intervals(s: IntervalSet, t: float) -> IntervalSet:
    """Move every midpoint to ``m * exp(-t)``; valid only before the first merge."""
    if t < 0:
        raise FlowError("negative flow time")
    if t >= next_merge_time(s):
        raise FlowError(f"t={t} reaches a merge at {next_merge_time(s)}; step through merge_at")
    return IntervalSet(_evolve(s, t).intervals)


def _fuse(s: IntervalSet, t_star: float) -> tuple[IntervalSet, list[float]]:
    m, r = s.barycenters, s.radii
    f = math.exp(-t_star)
    t_pair = _pair_times(m, r)
    touch = t_pair <= t_star + MERGE_TIME_TOL * max(1.0, t_star)
    out, xs = [], []
    i = 0
    n = len(m)
    while i < n:
        j = i
        while j < n - 1 and touch[j]:
            xs.append(float(0.5 * ((m[j] * f + r[j]) + (m[j + 1] * f - r[j + 1]))))
            j += 1
        # fused interval: total length, length-weighted midpoint
        w = r[i:j + 1]
        R = float(w.sum())
        M = float(np.dot(w, m[i:j + 1]) / R) * f
        out.append((M - R, M + R))
        i = j + 1
    return IntervalSet(tuple(out)), xs


def merge_at(s: IntervalSet, t_star: float) -> IntervalSet:
    """Evolve to the first contact ``t_star`` and fuse every touching chain."""
    t_next = next_merge_time(s)
    if not math.isfinite(t_next) or abs(t_star - t_next) > MERGE_TIME_TOL * max(1.0, t_next):
        raise FlowError(f"t_star={t_star} does not match next merge time {t_next}")
    return _fuse(s, t_star)[0]


@dataclass
class _StripHistory:
    """Piecewise description of one strip: states right after each merge."""

    times: list[float]
    states: list[IntervalSet]
    events: list[MergeEvent]

    @classmethod
    def build(cls, k: int, s: IntervalSet, t0: float, t_end: float) -> "_StripHistory":
        times, states, events = [t0], [s], []
        cur, tc = s, t0
        while True:
            dt = next_merge_time(cur)
            if not math.isfinite(dt) or tc + dt > t_end:
                break
            cur, xs = _fuse(cur, dt)
            tc = tc + dt
            times.append(tc)
            states.append(cur)
            events.extend(MergeEvent(k, tc, x) for x in xs)
        return cls(times, states, events)

    def at(self, t: float) -> IntervalSet:
        i = bisect.bisect_right(self.times, t) - 1
        return _evolve(self.states[i], t - self.times[i])


def _histories(dom: StripDomain, t_end: float) -> list[_StripHistory]:
    return [_StripHistory.build(k, s, dom.time, t_end) for k, s in enumerate(dom.strips)]


def _state(dom: StripDomain, hist: list[_StripHistory], t: float) -> StripDomain:
    return replace(dom, strips=tuple(IntervalSet(h.at(t).intervals) for h in hist), time=t, walls=())


def strip_flow_to(dom: StripDomain, t: float) -> tuple[StripDomain, list[MergeEvent]]:
    """Flow every strip from ``dom.time`` to ``t``; returns the new domain and its merges."""
    if t < dom.time:
        raise FlowError("cannot flow backwards")
    hist = _histories(dom, t)
    events = sorted((e for h in hist for e in h.events), key=lambda e: (e.time, e.strip, e.x))
    return _state(dom, hist, t), events


# ---------------------------------------------------------------------------
# walls


def _cluster(values: Sequence[float], tol: float) -> list[list[int]]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    groups: list[list[int]] = []
    for i in order:
        if groups and values[i] - values[groups[-1][0]] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def detect_walls(
    dom: StripDomain,
    events: Sequence[MergeEvent],
    w_min: int = W_MIN,
    delta_t: float = DELTA_T,
    delta_x: float = DELTA_X,
) -> list[WallSegment]:
    """Group merges that share time and abscissa over >= ``w_min`` consecutive strips."""
    walls = []
    times = [e.time for e in events]
    for tg in _cluster(times, delta_t):
        batch = [events[i] for i in tg]
        for xg in _cluster([e.x for e in batch], delta_x):
            grp = [batch[i] for i in xg]
            ks = sorted({e.strip for e in grp})
            run = [ks[0]]
            for k in ks[1:] + [None]:
                if k is not None and k == run[-1] + 1:
                    run.append(k)
                    continue
                if len(run) >= w_min:
                    inrun = [e for e in grp if run[0] <= e.strip <= run[-1]]
                    walls.append(
                        WallSegment(
                            x=float(np.mean([e.x for e in inrun])),
                            strip_lo=run[0],
                            strip_hi=run[-1],
                            eta=0.0,
                            time=max(e.time for e in inrun),
                        )
                    )
                if k is not None:
                    run = [k]
    if any(w.strip_hi >= dom.n_strips for w in walls):
        raise FlowError("merge event outside the strip range")
    return sorted(walls, key=lambda w: (w.time, w.strip_lo, w.x))


def shrink_wall(dom: StripDomain, w: WallSegment | int, eta: float) -> StripDomain:
    """Advance one wall's shrink progress; ``eta = 1`` removes it."""
    idx = w if isinstance(w, int) else dom.walls.index(w)
    cur = dom.walls[idx]
    if eta < cur.eta:
        raise FlowError("wall shrink must be monotone")
    if eta > 1.0:
        raise FlowError("eta above 1")
    walls = list(dom.walls)
    if eta >= 1.0:
        del walls[idx]
    else:
        walls[idx] = replace(cur, eta=float(eta))
    return dom.with_walls(walls)


# ---------------------------------------------------------------------------
# changing direction


def reslice(dom: StripDomain, d: Direction | float, n_strips: int, area: float | None = None) -> StripDomain:
    """Re-cut the set described by ``dom`` into strips along another direction.

    The strip rectangles are intersected with the midlines of the new strips.
    When ``area`` is given, the new sections are stretched along the strips by
    the uniform factor that restores that area exactly.
    """
    if dom.walls:
        raise FlowError("cannot reslice while walls are active")
    d = Direction.coerce(d)
    rect = dom.rectangles()
    if not len(rect):
        raise GeometryError("strip domain is empty")
    phi = d.angle - dom.frame_angle
    c, s = math.cos(phi), math.sin(phi)
    # corners into the new frame: rotate by -phi
    cx = np.concatenate([rect[:, 0], rect[:, 1], rect[:, 0], rect[:, 1]])
    cy = np.concatenate([rect[:, 2], rect[:, 2], rect[:, 3], rect[:, 3]])
    ny_new = -s * cx + c * cy
    ymin, ymax = float(ny_new.min()), float(ny_new.max())
    dy = (ymax - ymin) / n_strips
    ys = ymin + (np.arange(n_strips) + 0.5) * dy

    # point (u, y') of the new frame sits at (u c - y' s, u s + y' c) in the old one
    a, b, lo, hi = (rect[:, i][None, :] for i in range(4))
    Y = ys[:, None]

    def srange(coef, off, lo_, hi_):
        # values of u with lo_ < coef*u + off < hi_
        if abs(coef) < 1e-14:
            ok = (off > lo_) & (off < hi_)
            return np.where(ok, -np.inf, np.inf), np.where(ok, np.inf, -np.inf)
        u1 = (lo_ - off) / coef
        u2 = (hi_ - off) / coef
        return np.minimum(u1, u2), np.maximum(u1, u2)

    ux_lo, ux_hi = srange(c, -Y * s, a, b)
    uy_lo, uy_hi = srange(s, Y * c, lo, hi)
    ulo = np.maximum(ux_lo, uy_lo)
    uhi = np.minimum(ux_hi, uy_hi)
    valid = ulo < uhi
    strips = []
    for k in range(n_strips):
        v = valid[k]
        strips.append(IntervalSet.from_pairs(zip(ulo[k, v], uhi[k, v])))
    out = StripDomain(ymin, dy, tuple(strips), frame_angle=d.angle, time=0.0)
    if area is not None and out.area > 0:
        fac = area / out.area
        out = replace(out, strips=tuple(IntervalSet(st.scaled(fac).intervals) for st in out.strips))
    return out


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class FlowSchedule:
    """Directions to flow along, each for ``horizon`` units of flow time."""

    directions: tuple[Direction, ...]
    horizon: float | tuple[float, ...] = 6.0
    shrink_duration: float = 1.0

    def __post_init__(self):
        dirs = tuple(Direction.coerce(d) for d in self.directions)
        if not dirs:
            raise FlowError("schedule needs at least one direction")
        object.__setattr__(self, "directions", dirs)
        hz = self.horizon
        hz = tuple(float(h) for h in hz) if isinstance(hz, (tuple, list)) else (float(hz),) * len(dirs)
        if len(hz) != len(dirs) or min(hz) <= 0:
            raise FlowError("horizons must be positive, one per direction")
        object.__setattr__(self, "horizon", hz)
        if self.shrink_duration <= 0:
            raise FlowError("shrink duration must be positive")

    @classmethod
    def uniform(cls, k: int = 8, horizon: float = 6.0, shrink_duration: float = 1.0, offset: float = 0.0):
        """``k`` directions at angles ``offset + j*pi/k``."""
        return cls(tuple(Direction(offset + j * math.pi / k) for j in range(k)), horizon, shrink_duration)


@dataclass(frozen=True)
class FlowEvent:
    kind: str  # merge | wall_start | wall_end
    phase: int
    strip_lo: int
    strip_hi: int
    flow_time: float
    t_global: float
    x: float = math.nan


@dataclass
class FlowSnapshot:
    t_global: float
    phase: int
    domain: StripDomain
    events: list[FlowEvent] = field(default_factory=list)
    lam: float | None = None
    torsion: float | None = None

    @property
    def area(self) -> float:
        return self.domain.area

    @property
    def n_walls(self) -> int:
        return sum(1 for w in self.domain.walls if len(w.active_range()))


@dataclass
class _Segment:
    phase: int
    kind: str  # flow | shrink
    g0: float  # unnormalized global start
    g1: float
    t0: float  # flow-time start (phase local)
    t1: float
    walls: tuple[WallSegment, ...] = ()
    profile: tuple[tuple[float, ...], tuple[float, ...]] | None = None  # (u, eta) knots

    def eta(self, u: float) -> float:
        if self.profile is None:
            return u
        return float(np.interp(u, *self.profile))


@dataclass
class _Phase:
    start: StripDomain
    hist: list[_StripHistory]
    horizon: float
    instants: list[tuple[float, tuple[WallSegment, ...], tuple | None]]
    detected: list[WallSegment]


@dataclass
class FlowPlan:
    """The whole run laid out on one clock, reparametrized to ``[0, 1]``."""

    schedule: FlowSchedule
    phases: list[_Phase]
    segments: list[_Segment]
    modified: bool
    area0: float

    @property
    def total(self) -> float:
        return self.segments[-1].g1

    def reparam(self, t_global: float) -> tuple[_Segment, float]:
        """Segment containing ``t_global`` and the position inside it (flow time or eta)."""
        if not 0.0 <= t_global <= 1.0:
            raise FlowError("global time outside [0, 1]")
        g = t_global * self.total
        for seg in self.segments:
            if g <= seg.g1 or seg is self.segments[-1]:
                u = 0.0 if seg.g1 == seg.g0 else min(1.0, max(0.0, (g - seg.g0) / (seg.g1 - seg.g0)))
                if seg.kind == "flow":
                    return seg, seg.t0 + u * (seg.t1 - seg.t0)
                return seg, u
        raise AssertionError("unreachable")

    def global_time(self, phase: int, flow_time: float) -> float:
        """Global time at which a flow instant is reached (start of any shrink there)."""
        for seg in self.segments:
            if seg.phase == phase and seg.kind == "flow" and seg.t0 <= flow_time <= seg.t1:
                span = seg.t1 - seg.t0
                u = 0.0 if span == 0 else (flow_time - seg.t0) / span
                return (seg.g0 + u * (seg.g1 - seg.g0)) / self.total
        raise FlowError(f"flow time {flow_time} not in phase {phase}")

    def domain_at(self, t_global: float) -> tuple[int, StripDomain]:
        seg, u = self.reparam(t_global)
        ph = self.phases[seg.phase]
        if seg.kind == "flow":
            return seg.phase, _state(ph.start, ph.hist, u)
        dom = _state(ph.start, ph.hist, seg.t0)
        eta = seg.eta(u)
        walls = tuple(replace(w, eta=eta) for w in seg.walls) if eta < 1.0 else ()
        return seg.phase, dom.with_walls(walls)

    def events(self) -> list[FlowEvent]:
        out = []
        for k, ph in enumerate(self.phases):
            for h in ph.hist:
                for e in h.events:
                    out.append(FlowEvent("merge", k, e.strip, e.strip, e.time, self.global_time(k, e.time), e.x))
        for seg in self.segments:
            if seg.kind == "shrink":
                for w in seg.walls:
                    for kind, g in (("wall_start", seg.g0), ("wall_end", seg.g1)):
                        out.append(
                            FlowEvent(kind, seg.phase, w.strip_lo, w.strip_hi, seg.t0, g / self.total, w.x)
                        )
        order = {"merge": 0, "wall_start": 1, "wall_end": 2}
        return sorted(out, key=lambda e: (e.t_global, order[e.kind], e.phase, e.strip_lo))


WallConfirm = Callable[[StripDomain, WallSegment], bool]
ShrinkProfile = Callable[[StripDomain, tuple[WallSegment, ...]], tuple[Sequence[float], Sequence[float]]]


def _check_profile(knots) -> tuple[tuple[float, ...], tuple[float, ...]]:
    u, eta = (np.asarray(k, dtype=float) for k in knots)
    if (
        u.shape != eta.shape or u.size < 2 or u[0] != 0.0 or u[-1] != 1.0 or eta[0] != 0.0 or eta[-1] != 1.0
        or np.any(np.diff(u) < 0) or np.any(np.diff(eta) < 0)
    ):
        raise FlowError("shrink profile must be monotone knots from (0, 0) to (1, 1)")
    return tuple(u.tolist()), tuple(eta.tolist())


def plan_schedule(
    p: Polygon | StripDomain,
    sched: FlowSchedule,
    n_strips: int = 256,
    modified: bool = True,
    confirm: WallConfirm | None = None,
    profile: ShrinkProfile | None = None,
) -> FlowPlan:
    """Run the event-driven flow for every phase and lay out the global clock.

    ``confirm(domain, wall)`` decides whether a detected wall carries a real
    jump; without it every detected wall is shrunk.  ``profile(domain, walls)``
    returns monotone ``(u, eta)`` knots giving the wall fraction removed at
    each point of a shrink segment; the default is ``eta = u``.
    """
    if n_strips < 8:
        raise FlowError("n_strips must be at least 8")
    if isinstance(p, Polygon):
        dom = slice_polygon(p, sched.directions[0], n_strips)
    else:
        dom = p if p.frame_angle == sched.directions[0].angle else reslice(p, sched.directions[0], n_strips, p.area)
    dom = replace(dom, time=0.0, walls=())
    area0 = dom.area
    if not area0 > 0:
        raise FlowError("degenerate domain")

    phases: list[_Phase] = []
    segments: list[_Segment] = []
    g = 0.0
    for k, (d, H) in enumerate(zip(sched.directions, sched.horizon)):
        if k > 0:
            dom = reslice(dom, d, n_strips, area=area0)
        hist = _histories(dom, H)
        events = sorted((e for h in hist for e in h.events), key=lambda e: (e.time, e.strip, e.x))
        detected = detect_walls(dom, events)
        instants: list[tuple[float, tuple[WallSegment, ...], tuple | None]] = []
        if modified and detected:
            for grp in _cluster([w.time for w in detected], DELTA_T):
                ws = [detected[i] for i in grp]
                t_c = max(w.time for w in ws)
                plus = _state(dom, hist, t_c)
                kept = tuple(w for w in ws if confirm is None or confirm(plus, w))
                if kept:
                    knots = _check_profile(profile(plus, kept)) if profile is not None else None
                    instants.append((t_c, kept, knots))
        phases.append(_Phase(dom, hist, H, instants, detected))
        t_prev = 0.0
        for t_c, ws, knots in instants:
            segments.append(_Segment(k, "flow", g, g + (t_c - t_prev), t_prev, t_c))
            g += t_c - t_prev
            segments.append(_Segment(k, "shrink", g, g + sched.shrink_duration, t_c, t_c, ws, knots))
            g += sched.shrink_duration
            t_prev = t_c
        segments.append(_Segment(k, "flow", g, g + (H - t_prev), t_prev, H))
        g += H - t_prev
        dom = _state(dom, hist, H)
    return FlowPlan(sched, phases, segments, modified, area0)


def run_schedule(
    p: Polygon | StripDomain,
    sched: FlowSchedule,
    samples: int = 40,
    n_strips: int = 256,
    modified: bool = True,
    confirm: WallConfirm | None = None,
    plan: FlowPlan | None = None,
    profile: ShrinkProfile | None = None,
) -> list[FlowSnapshot]:
    """Snapshots of the (modified) flow at ``samples`` equally spaced global times."""
    if samples < 2:
        raise FlowError("need at least two samples")
    if plan is None:
        plan = plan_schedule(p, sched, n_strips, modified, confirm, profile)
    ts = np.linspace(0.0, 1.0, samples)
    events = plan.events()
    snaps = []
    prev = -1.0
    for t in ts:
        phase, dom = plan.domain_at(float(t))
        evs = [e for e in events if prev < e.t_global <= t]
        snaps.append(FlowSnapshot(float(t), phase, dom, evs))
        prev = float(t)
    for s in snaps:
        if abs(s.area - plan.area0) > 1e-9 * plan.area0:
            raise FlowError(f"area drift at t={s.t_global}: {s.area} vs {plan.area0}")
    return snaps


def default_spacing(p: Polygon, resolution: int = 128) -> float:
    """Grid spacing so that the domain diameter spans ``resolution`` nodes."""
    return diameter(p) / resolution
