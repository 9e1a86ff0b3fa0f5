import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from steinerflow.geometry import IntervalSet, StripDomain, WallSegment, slice_polygon, steiner_symmetrize
from steinerflow.pde import (
    GridMask,
    SolverError,
    eigen_solve,
    gamma_distance,
    laplacian,
    rasterize,
    rasterize_polygon,
    torsion_gap_l1,
    torsion_solve,
    write_field,
)
from steinerflow.shapes import disk, rectangle, two_disks

from test_oracles import J0_SQ, LAMBDA_SQUARE, T_SQUARE

SQUARE = rectangle(0, 0, 1, 1)


def random_mask(rng, n=14, p=0.7) -> np.ndarray:
    m = np.zeros((n, n), dtype=bool)
    m[2:-2, 2:-2] = rng.random((n - 4, n - 4)) < p
    if not m.any():
        m[n // 2, n // 2] = True
    return m


# ---------------------------------------------------------------- rasterization


def test_square_node_count():
    g = rasterize(slice_polygon(SQUARE, 0.0, 8), 1 / 64)
    assert g.n_free == 63 * 63
    assert rasterize_polygon(SQUARE, 1 / 64).n_free == 63 * 63


def test_margin_of_outside_nodes():
    g = rasterize(slice_polygon(SQUARE, 0.0, 16), 1 / 16)
    assert not g.inside[:2].any() and not g.inside[-2:].any()
    assert not g.inside[:, :2].any() and not g.inside[:, -2:].any()


def test_symmetral_mask_mirror_symmetric():
    dom = steiner_symmetrize(disk(40).translated(0.3, 0.1), 0.0, 64)
    g = rasterize(dom, 1 / 32)
    xs, _ = g.coords()
    assert np.allclose(xs, -xs[::-1], atol=1e-12)
    assert np.array_equal(g.inside, g.inside[:, ::-1])


def test_wall_node_column():
    # h equal to dy so strips and lattice rows coincide
    dom = StripDomain(0.0, 1 / 32, tuple(IntervalSet(((-1, 1),)) for _ in range(64)))
    dom = dom.with_walls((WallSegment(0.0, 10, 50),))
    g = rasterize(dom, 1 / 32, wall_mode="node")
    _, ys = g.coords()
    rows, cols = np.nonzero(g.wall_node)
    assert set(cols) == {int(np.argmin(np.abs(g.coords()[0])))}
    strip_of_row = np.floor((ys[rows] - dom.y0) / dom.dy + 1e-9).astype(int)
    # rows on the lower edge of a strip also count that strip
    assert strip_of_row.min() >= 10 and strip_of_row.max() <= 51


def test_cut_wall_blocks_flux():
    base = StripDomain(0.0, 1 / 64, tuple(IntervalSet(((-0.5, 0.5),)) for _ in range(64)))
    walled = base.with_walls((WallSegment(0.01, 0, 63),))
    t0, _ = torsion_solve(rasterize(base, 1 / 64))
    t1, _ = torsion_solve(rasterize(walled, 1 / 64))
    # a full-height slit splits the unit square into two rectangles
    half = rectangle(0, 0, 0.5, 1)
    t_half, _ = torsion_solve(rasterize_polygon(half, 1 / 64))
    assert t1 < t0
    assert t1 == pytest.approx(2 * t_half, rel=0.02)


def test_slit_shrink_monotone_and_continuous():
    base = StripDomain(0.0, 1 / 64, tuple(IntervalSet(((-0.5, 0.5),)) for _ in range(64)))

    def T(eta):
        walls = (WallSegment(0.013, 0, 63, eta=float(eta)),) if eta < 1 else ()
        return torsion_solve(rasterize(base.with_walls(walls), 1 / 32, bbox=base.bbox()), 1e-12)[0]

    vals = np.array([T(e) for e in np.linspace(0, 1, 21)])
    assert np.all(np.diff(vals) >= -1e-12)
    # no jump below the lattice scale: the slit's effect fades as it vanishes
    span = vals[-1] - vals[0]
    gaps = [vals[-1] - T(1 - e) for e in (1e-2, 1e-3, 1e-4)]
    assert gaps[1] < 0.2 * gaps[0] and gaps[2] < 0.2 * gaps[1]
    assert gaps[2] < 0.01 * span


def test_empty_rasterization_rejected():
    with pytest.raises(ValueError):
        rasterize(slice_polygon(rectangle(0, 0, 0.01, 0.01), 0.0, 8), 0.5)


# ---------------------------------------------------------------- solvers


def test_square_values():
    g = rasterize_polygon(SQUARE, 1 / 128)
    T, u = torsion_solve(g)
    lam, _ = eigen_solve(g)
    assert T == pytest.approx(T_SQUARE, rel=0.02)
    assert lam == pytest.approx(LAMBDA_SQUARE, rel=0.02)
    assert u.min() >= 0 and np.all(u[g.free] > 0)


def test_disk_values():
    g = rasterize_polygon(disk(512), 1 / 64)
    T, _ = torsion_solve(g)
    lam, _ = eigen_solve(g)
    assert T == pytest.approx(math.pi / 8, rel=0.02)
    assert lam == pytest.approx(J0_SQ, rel=0.02)


def test_two_disks_components():
    h = 1 / 32
    one = disk(128).translated(-2.0, 0.0)
    both = two_disks(128, 1.0, 2.0)  # centres at -2 and 2, both on lattice points
    T1, _ = torsion_solve(rasterize_polygon(one, h, bbox=both.bbox()))
    T2, _ = torsion_solve(rasterize_polygon(both, h))
    assert T2 == pytest.approx(2 * T1, rel=1e-6)


def test_two_disks_unequal_eigenvalue():
    h = 1 / 32
    big = disk(128)
    from steinerflow.geometry import Polygon

    small = np.array(disk(128, 0.5).rings[0]) + [3.0, 0.0]
    both = Polygon([big.rings[0], small])
    lam1, _ = eigen_solve(rasterize_polygon(big, h, bbox=both.bbox()))
    lam2, _ = eigen_solve(rasterize_polygon(both, h))
    assert lam2 == pytest.approx(lam1, rel=1e-6)


def test_torsion_residual_and_symmetry():
    g = rasterize_polygon(disk(64), 1 / 16)
    A, _ = laplacian(g)
    assert abs(A - A.T).max() == 0.0
    T, u = torsion_solve(g, tol=1e-12)
    v = u[g.free]
    assert np.linalg.norm(A @ v - 1) / math.sqrt(len(v)) < 1e-10


def test_rayleigh_consistency():
    g = rasterize_polygon(disk(64).translated(0.1, 0), 1 / 24)
    lam, u = eigen_solve(g)
    A, idx = laplacian(g)
    v = u[g.free]
    assert g.h * np.linalg.norm(v) == pytest.approx(1.0, rel=1e-12)
    assert np.all(v >= 0)
    assert (v @ (A @ v)) / (v @ v) == pytest.approx(lam, rel=1e-8)


def test_scaling_laws():
    g = rasterize_polygon(disk(64), 1 / 16)
    T, _ = torsion_solve(g, 1e-12)
    lam, _ = eigen_solve(g, 1e-12)
    s = 2.5
    gs = g.scaled(s)
    Ts, _ = torsion_solve(gs, 1e-12)
    lams, _ = eigen_solve(gs, 1e-12)
    assert Ts == pytest.approx(T * s ** 4, rel=1e-9)
    assert lams == pytest.approx(lam / s ** 2, rel=1e-9)


def test_mesh_convergence_disk():
    p = disk(1024)
    errs_t, errs_l = [], []
    for h in (1 / 16, 1 / 32):
        g = rasterize_polygon(p, h)
        errs_t.append(abs(torsion_solve(g)[0] - math.pi / 8))
        errs_l.append(abs(eigen_solve(g)[0] - J0_SQ))
    assert math.log2(errs_t[0] / errs_t[1]) >= 1.7
    assert math.log2(errs_l[0] / errs_l[1]) >= 1.7


def test_cg_failure_reported():
    g = rasterize_polygon(SQUARE, 1 / 64)
    with pytest.raises(SolverError):
        torsion_solve(g, tol=1e-30)


@given(st.integers(0, 2 ** 32 - 1))
def test_monotone_in_domain(seed):
    rng = np.random.default_rng(seed)
    big = random_mask(rng)
    small = big & (rng.random(big.shape) < 0.85)
    if not small.any():
        return
    gb, gs = GridMask.from_nodes(big, 0.1), GridMask.from_nodes(small, 0.1)
    Tb, ub = torsion_solve(gb)
    Ts, us = torsion_solve(gs)
    assert Tb >= Ts - 1e-12
    # discrete maximum principle and comparison
    assert np.all(ub >= -1e-14) and np.all(ub >= us - 1e-10)
    assert np.all(ub[~gb.free] == 0)
    assert eigen_solve(gb)[0] <= eigen_solve(gs)[0] * (1 + 1e-8)


@given(st.integers(0, 2 ** 32 - 1))
def test_gap_identity_nested(seed):
    rng = np.random.default_rng(seed)
    big = random_mask(rng)
    small = big & (rng.random(big.shape) < 0.8)
    if not small.any():
        return
    gb, gs = GridMask.from_nodes(big, 0.1), GridMask.from_nodes(small, 0.1)
    gap = torsion_gap_l1(gs, gb)
    assert gap == pytest.approx(torsion_solve(gb)[0] - torsion_solve(gs)[0], rel=1e-8, abs=1e-14)
    assert torsion_gap_l1(gb, gb) == 0.0


def test_gap_square_minus_wall_column():
    h = 1 / 32
    g_full = rasterize_polygon(SQUARE, h)
    wall = np.zeros_like(g_full.inside)
    wall[:, g_full.nx // 2] = g_full.inside[:, g_full.nx // 2]
    g_wall = GridMask(g_full.h, g_full.origin, g_full.inside, wall, g_full.link_x, g_full.link_y, g_full.theta)
    assert torsion_gap_l1(g_wall, g_full) > 0
    with pytest.raises(ValueError):
        torsion_gap_l1(g_full, g_wall)


@given(st.integers(0, 2 ** 32 - 1))
def test_gamma_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (GridMask.from_nodes(random_mask(rng), 0.1) for _ in range(3))
    dab, dbc, dac = gamma_distance(a, b), gamma_distance(b, c), gamma_distance(a, c)
    assert gamma_distance(a, a) == 0.0
    assert dab == pytest.approx(gamma_distance(b, a), abs=1e-10)
    assert dac <= dab + dbc + 1e-10


def test_gamma_disjoint_supports():
    left = np.zeros((12, 20), dtype=bool)
    right = left.copy()
    left[2:10, 2:8] = True
    right[2:10, 11:18] = True
    g1, g2 = GridMask.from_nodes(left, 0.1), GridMask.from_nodes(right, 0.1)
    _, u1 = torsion_solve(g1)
    _, u2 = torsion_solve(g2)
    n1, n2 = 0.1 * np.linalg.norm(u1), 0.1 * np.linalg.norm(u2)
    assert gamma_distance(g1, g2) == pytest.approx(math.hypot(n1, n2), rel=1e-10)


def test_grid_mismatch():
    g1 = GridMask.from_nodes(random_mask(np.random.default_rng(0)), 0.1)
    g2 = GridMask.from_nodes(random_mask(np.random.default_rng(0)), 0.2)
    with pytest.raises(ValueError):
        gamma_distance(g1, g2)


def test_write_field(tmp_path):
    g = rasterize_polygon(SQUARE, 1 / 8)
    _, u = torsion_solve(g)
    path = tmp_path / "u.txt"
    write_field(path, g, u)
    back = np.loadtxt(path)
    assert back.shape == (g.ny, g.nx)
    assert np.array_equal(back, u)
