"""Acceptance criteria, one test each; the summary prints one pass/fail line per criterion."""
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from helpers import bisect_gap, brute_force_flow, hausdorff, random_interval_sets
from steinerflow.diagram import (
    PLANE,
    BallConstants,
    bfnt_upper,
    diagram_point,
    family_curve,
    family_values,
    h_lower,
)
from steinerflow.geometry import StripDomain, area, slice_polygon
from steinerflow.pde import (
    GridMask,
    eigen_solve,
    gamma_distance,
    rasterize_polygon,
    torsion_gap_l1,
    torsion_solve,
)
from steinerflow.runner import check_monotone, max_threads, solve_flow
from steinerflow.shapes import disk, lshape, random_star, rectangle, two_disks, ushape
from steinerflow.symflow import FlowSchedule, default_spacing, next_merge_time, strip_flow_to

from test_oracles import J0_SQ, LAMBDA_SQUARE, T_SQUARE

RESOLUTION = 128
SAMPLES = 40

_flows: dict = {}


def modified_flow(name: str):
    """Default eight-direction modified flow, shared by the criteria that need it."""
    if name not in _flows:
        p = {"ushape": ushape, "lshape": lshape}[name]()
        _flows[name] = solve_flow(p, FlowSchedule.uniform(8), samples=SAMPLES, resolution=RESOLUTION)
    return _flows[name]


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_ball_constants(report):
    t0 = time.perf_counter()
    p = disk(1024)
    g = rasterize_polygon(p, default_spacing(p, RESOLUTION))
    T, _ = torsion_solve(g)
    lam, _ = eigen_solve(g)
    dt = time.perf_counter() - t0
    e_lam, e_t = rel(lam, J0_SQ), rel(T, math.pi / 8)
    report(
        1,
        e_lam <= 0.02 and e_t <= 0.02 and dt < 60,
        f"lambda rel err {e_lam:.2e}, T rel err {e_t:.2e}, {dt:.1f} s",
    )


def test_criterion_2_oracle_domains(report):
    sq = rectangle(0, 0, 1, 1)
    errs_l, errs_t = [], []
    for h in (1 / 64, 1 / 128):
        g = rasterize_polygon(sq, h)
        errs_t.append(rel(torsion_solve(g)[0], T_SQUARE))
        errs_l.append(rel(eigen_solve(g)[0], LAMBDA_SQUARE))
    order_l = math.log2(errs_l[0] / errs_l[1])
    order_t = math.log2(errs_t[0] / errs_t[1])
    report(
        2,
        errs_l[1] <= 0.02 and errs_t[1] <= 0.02 and min(order_l, order_t) >= 1.7,
        f"lambda err {errs_l[1]:.2e}, T err {errs_t[1]:.2e}, orders {order_l:.2f} / {order_t:.2f}",
    )


def test_criterion_3_flow_exactness(report):
    rng = np.random.default_rng(2024)
    sets = random_interval_sets(rng, 200, max_k=5)
    times = np.round(np.linspace(0.0, 4.0, 100) / 1e-5) * 1e-5
    ref = brute_force_flow(sets, times)
    worst = 0.0
    for k, t in enumerate(times):
        for i, s in enumerate(sets):
            got = strip_flow_to(StripDomain(0.0, 1.0, (s,)), float(t))[0].strips[0]
            worst = max(worst, hausdorff(got.endpoints().ravel(), ref[k][i]))
    gap = 0.0
    for s in sets:
        m, r = s.barycenters, s.radii
        want = min((bisect_gap(m[i + 1] - m[i], r[i] + r[i + 1]) for i in range(len(s) - 1)), default=math.inf)
        got = next_merge_time(s)
        gap = max(gap, 0.0 if math.isinf(want) and math.isinf(got) else abs(got - want))
    _, events = strip_flow_to(slice_polygon(ushape(), 0.0, 256), 1.0)
    u_times = {e.time for e in events}
    exact = u_times == {math.log(2.0)}
    report(
        3,
        worst <= 1e-3 and gap <= 1e-10 and exact,
        f"endpoint err {worst:.2e}, merge-time err {gap:.1e}, U merge times {sorted(u_times)}",
    )


def test_criterion_4_monotonicity(report):
    parts, ok = [], True
    for name in ("ushape", "lshape"):
        snaps = modified_flow(name)
        rep = check_monotone(snaps, 0.01)
        ok &= rep.passed and rep.max_area_drift <= 1e-9
        parts.append(
            f"{name}: lambda up {rep.max_lambda_increase:.2e}, T down {rep.max_torsion_decrease:.2e}, "
            f"area drift {rep.max_area_drift:.1e}"
        )
    report(4, ok, "; ".join(parts))


def _steps(snaps):
    t = np.array([s.torsion for s in snaps])
    return np.abs(np.diff(t))


def test_criterion_5_discontinuity_contrast(report):
    # one horizontal direction over a short window, so that the steps being
    # compared all belong to the same phase of motion; see the README
    sched = FlowSchedule([0.0], horizon=1.0, shrink_duration=1.0)
    plain = solve_flow(ushape(), sched, samples=SAMPLES, resolution=RESOLUTION, modified=False)
    mod = solve_flow(ushape(), sched, samples=SAMPLES, resolution=RESOLUTION, modified=True)
    sp, sm = _steps(plain), _steps(mod)
    k = int(np.argmax(sp))
    t_wall = math.log(2.0) / 1.0
    at_wall = plain[k].t_global <= t_wall <= plain[k + 1].t_global
    c_plain = sp.max() / np.median(sp)
    c_mod = sm.max() / np.median(sm)
    report(
        5,
        at_wall and c_plain >= 10 and c_mod <= 3,
        f"unmodified jump {c_plain:.1f}x median (at wall: {at_wall}), modified max {c_mod:.2f}x median",
    )


def test_criterion_6_convergence_to_ball(report):
    s = modified_flow("lshape")[-1]
    p = diagram_point(s.lam, s.torsion, s.area, PLANE)
    dist = p.distance_to_ball()
    report(6, dist <= 0.05, f"terminal point ({p.x:.4f}, {p.y:.4f}), distance {dist:.4f}")


def test_criterion_7_inequality_suite(report):
    rng = np.random.default_rng(12345)
    corpus = [random_star(rng) for _ in range(100)]

    def point(p):
        g = rasterize_polygon(p, default_spacing(p, RESOLUTION))
        T, _ = torsion_solve(g)
        lam, _ = eigen_solve(g)
        return diagram_point(lam, T, area(p), PLANE, eps=math.inf)

    with ThreadPoolExecutor(max_threads()) as ex:
        pts = list(ex.map(point, corpus))
    x = np.array([q.x for q in pts])
    y = np.array([q.y for q in pts])
    fk = x <= 1.02
    sv = y <= 1.02
    kj = y >= x ** 2 - 0.03
    bf = y <= bfnt_upper(x) + 0.03
    bad = int(np.sum(~(fk & sv & kj & bf)))
    report(
        7,
        bad == 0,
        f"{len(pts)} polygons, {bad} violations; max x {x.max():.4f}, max y {y.max():.4f}, "
        f"min y - x^2 {np.min(y - x ** 2):.4f}, max y - bfnt {np.max(y - bfnt_upper(x)):.4f}",
    )


def test_criterion_8_analytic_identities(report):
    rng = np.random.default_rng(99)
    worst = 0.0
    end = 0.0
    for _ in range(1000):
        d = int(rng.choice([2, 3]))
        c = BallConstants.for_dimension(d)
        lam, tor, vol = rng.uniform(0.5, 50), rng.uniform(1e-3, 5), rng.uniform(0.1, 10)
        n, sigma = int(rng.integers(2, 10)), float(rng.uniform())
        base = diagram_point(lam, tor, vol, c, eps=math.inf)
        q = diagram_point(*family_values(lam, tor, n, d, sigma), vol, c, eps=math.inf)
        x, y = family_curve(base.x, base.y, n, d, sigma)
        worst = max(worst, abs(q.x - x) / x, abs(q.y - y) / y)
        x1, y1 = family_curve(base.x, base.y, n, d, 1.0)
        f = n ** (-2 / d)
        end = max(end, abs(x1 - f * base.x) / x1, abs(y1 - f * base.y) / y1)
    a = diagram_point(J0_SQ, 2 * math.pi / 8, 2 * math.pi)
    e_analytic = max(abs(a.x - 0.5), abs(a.y - 0.5))
    p = two_disks(1024)
    g = rasterize_polygon(p, default_spacing(p, RESOLUTION))
    b = diagram_point(eigen_solve(g)[0], torsion_solve(g)[0], area(p), eps=math.inf)
    e_pde = max(abs(b.x - 0.5), abs(b.y - 0.5))
    e_h = abs(h_lower(0.5, 2) - 0.5)
    report(
        8,
        worst <= 1e-12 and end <= 1e-12 and e_analytic <= 1e-12 and e_pde <= 0.02 and e_h <= 1e-12 and a.y == pytest.approx(h_lower(a.x, 2), abs=1e-12),
        f"family err {worst:.1e}, endpoint err {end:.1e}, two disks analytic {e_analytic:.1e}, "
        f"PDE ({b.x:.4f}, {b.y:.4f}), h_lower(0.5) err {e_h:.1e}",
    )


def test_criterion_9_gamma_identities(report):
    rng = np.random.default_rng(7)

    def mask():
        m = np.zeros((24, 24), dtype=bool)
        m[2:-2, 2:-2] = rng.random((20, 20)) < 0.75
        return m

    gap_err = 0.0
    for _ in range(50):
        big = mask()
        small = big & (rng.random(big.shape) < 0.8)
        if not small.any():
            continue
        gb, gs = GridMask.from_nodes(big, 0.05), GridMask.from_nodes(small, 0.05)
        diff = torsion_solve(gb)[0] - torsion_solve(gs)[0]
        gap_err = max(gap_err, abs(torsion_gap_l1(gs, gb) - diff) / max(diff, 1e-300))
    ax = 0.0
    for _ in range(50):
        a, b, c = (GridMask.from_nodes(mask(), 0.05) for _ in range(3))
        dab, dba = gamma_distance(a, b), gamma_distance(b, a)
        dbc, dac = gamma_distance(b, c), gamma_distance(a, c)
        ax = max(ax, gamma_distance(a, a), abs(dab - dba), dac - dab - dbc)
    report(9, gap_err <= 1e-8 and ax <= 1e-10, f"L1 gap rel err {gap_err:.1e}, worst axiom defect {ax:.1e}")
