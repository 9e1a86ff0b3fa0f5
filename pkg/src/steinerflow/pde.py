"""Five-point finite differences for the Dirichlet Laplacian on lattice masks.

Nodes sit at integer multiples of ``h`` in the domain's frame.  A free node
couples to a neighbour through the usual stencil unless a boundary lies
between them.  In that case the neighbour value is replaced by the linear
extrapolation through zero at the boundary, a distance ``theta * h`` away.
This only adds ``1/theta`` to the diagonal, so the matrix stays symmetric
positive definite.

The boundary positions come straight from the interval sections.  Because
of this, the discrete operator moves continuously with the flow instead of
jumping whenever an endpoint crosses a grid column.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import IntervalSet, Polygon, StripDomain, rotate, section

__all__ = [
    "SolverError",
    "GridMask",
    "rasterize",
    "rasterize_polygon",
    "laplacian",
    "torsion_solve",
    "eigen_solve",
    "gamma_distance",
    "torsion_gap_l1",
    "write_field",
]

THETA_MIN = 1e-6
E, W, N, S = range(4)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class GridMask:
    """Occupancy of the lattice ``origin + (i*h, j*h)``; arrays are indexed ``[j, i]``.

    ``theta[d]`` is the distance, in units of ``h``, from a node to the
    boundary on its side ``d`` (E, W, N, S).  It is only read where no link
    joins the node to that neighbour.

    ``slit`` optionally describes vertical slits crossing horizontal links:
    ``slit[0]`` is the covered fraction of the link's dual face and
    ``slit[1]``, ``slit[2]`` the distances from the west and east node to
    the slit.  The covered part of the face is Dirichlet for both nodes and
    the rest still carries flux, so a slit can shrink continuously below
    the lattice scale.
    """

    h: float
    origin: tuple[float, float]
    inside: np.ndarray
    wall_node: np.ndarray
    link_x: np.ndarray
    link_y: np.ndarray
    theta: np.ndarray
    slit: np.ndarray | None = None

    def __post_init__(self):
        ny, nx = self.inside.shape
        if self.wall_node.shape != (ny, nx) or self.theta.shape != (4, ny, nx):
            raise ValueError("inconsistent mask arrays")
        if self.link_x.shape != (ny, max(nx - 1, 0)) or self.link_y.shape != (max(ny - 1, 0), nx):
            raise ValueError("inconsistent link arrays")
        if self.slit is not None and self.slit.shape != (3, ny, max(nx - 1, 0)):
            raise ValueError("inconsistent slit array")
        if np.any(self.wall_node & ~self.inside):
            raise ValueError("wall nodes must be inside")
        if not self.free.any():
            raise ValueError("mask has no free nodes")

    @property
    def nx(self) -> int:
        return self.inside.shape[1]

    @property
    def ny(self) -> int:
        return self.inside.shape[0]

    @property
    def free(self) -> np.ndarray:
        return self.inside & ~self.wall_node

    @property
    def n_free(self) -> int:
        return int(self.free.sum())

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        return (self.origin[0] + np.arange(self.nx) * self.h, self.origin[1] + np.arange(self.ny) * self.h)

    def same_grid(self, other: "GridMask") -> bool:
        return (
            self.h == other.h
            and self.inside.shape == other.inside.shape
            and np.allclose(self.origin, other.origin, rtol=0, atol=1e-12 * max(1.0, self.h))
        )

    def scaled(self, s: float) -> "GridMask":
        """Same node pattern at spacing ``s*h``."""
        return GridMask(
            self.h * s,
            (self.origin[0] * s, self.origin[1] * s),
            self.inside,
            self.wall_node,
            self.link_x,
            self.link_y,
            self.theta,
            self.slit,
        )

    @classmethod
    def from_nodes(cls, inside: np.ndarray, h: float, origin=(0.0, 0.0), wall_node=None) -> "GridMask":
        """Plain node mask: neighbours couple when both are inside, boundaries sit on nodes."""
        inside = np.asarray(inside, dtype=bool)
        wn = np.zeros_like(inside) if wall_node is None else np.asarray(wall_node, dtype=bool)
        return cls(
            float(h),
            (float(origin[0]), float(origin[1])),
            inside,
            wn,
            inside[:, :-1] & inside[:, 1:],
            inside[:-1, :] & inside[1:, :],
            np.ones((4,) + inside.shape),
        )

    @classmethod
    def from_predicate(cls, f: Callable[[np.ndarray, np.ndarray], np.ndarray], bbox, h: float) -> "GridMask":
        xmin, xmax, ymin, ymax = bbox
        i0, i1 = math.floor(xmin / h) - 2, math.ceil(xmax / h) + 2
        j0, j1 = math.floor(ymin / h) - 2, math.ceil(ymax / h) + 2
        X, Y = np.meshgrid(np.arange(i0, i1 + 1) * h, np.arange(j0, j1 + 1) * h)
        return cls.from_nodes(f(X, Y), h, (i0 * h, j0 * h))


# ---------------------------------------------------------------------------
# rasterization


def _lattice(bbox, h):
    xmin, xmax, ymin, ymax = bbox
    i0, i1 = math.floor(xmin / h) - 2, math.ceil(xmax / h) + 2
    j0, j1 = math.floor(ymin / h) - 2, math.ceil(ymax / h) + 2
    return i0, i1 - i0 + 1, j0, j1 - j0 + 1


def _line_ops(ivs: IntervalSet, k0: int, n: int, h: float):
    """Nodes ``(k0+k)*h`` against open intervals: inside, links, theta toward +/- side."""
    inside = np.zeros(n, dtype=bool)
    link = np.zeros(max(n - 1, 0), dtype=bool)
    th_pos = np.ones(n)
    th_neg = np.ones(n)
    for a, b in ivs:
        lo = math.floor(a / h) + 1 - k0
        hi = math.ceil(b / h) - 1 - k0
        lo, hi = max(lo, 0), min(hi, n - 1)
        if lo > hi:
            continue
        inside[lo:hi + 1] = True
        link[lo:hi] = True
        th_neg[lo] = ((k0 + lo) * h - a) / h
        th_pos[hi] = (b - (k0 + hi) * h) / h
    return inside, link, np.clip(th_pos, THETA_MIN, 1.0), np.clip(th_neg, THETA_MIN, 1.0)


def rasterize(dom: StripDomain, h: float, bbox=None, wall_mode: str = "cut") -> GridMask:
    """Lattice mask of a strip domain in its own (rotated) frame.

    ``wall_mode="cut"`` places each active wall as a zero-thickness Dirichlet
    slit at its exact abscissa over its continuous active extent.  ``"node"``
    instead pins the one column of nodes whose cell ``[x - h/2, x + h/2)``
    holds one of the wall's active strips.
    """
    if wall_mode not in ("cut", "node"):
        raise ValueError("wall_mode must be 'cut' or 'node'")
    i0, nx, j0, ny = _lattice(bbox or dom.bbox(), h)
    xs = (i0 + np.arange(nx)) * h
    ys = (j0 + np.arange(ny)) * h
    ns = dom.n_strips

    cuts: list[list[float]] = [[] for _ in range(ns)]
    for x, rng in dom.constrained():
        for s in rng:
            cuts[s].append(x)
    ivs = list(dom.strips)

    C = np.zeros((ns + 2, nx), dtype=bool)  # padded: rows 0 and ns+1 are empty
    for s, iv in enumerate(ivs):
        C[s + 1] = iv.contains(xs)
    up = np.empty((ns + 2, nx), dtype=np.int64)  # first empty padded strip at or above
    up[ns + 1] = ns + 1
    for s in range(ns, -1, -1):
        up[s] = np.where(C[s], up[s + 1], s)
    dn = np.empty((ns + 2, nx), dtype=np.int64)  # last empty padded strip at or below
    dn[0] = 0
    for s in range(1, ns + 2):
        dn[s] = np.where(C[s], dn[s - 1], s)

    inside = np.zeros((ny, nx), dtype=bool)
    wall_node = np.zeros((ny, nx), dtype=bool)
    link_x = np.zeros((ny, nx - 1), dtype=bool)
    theta = np.ones((4, ny, nx))
    s_up = np.zeros(ny, dtype=np.int64)
    s_dn = np.zeros(ny, dtype=np.int64)
    empty = IntervalSet(())
    for j, y in enumerate(ys):
        u = (y - dom.y0) / dom.dy
        e = round(u)
        if abs(u - e) <= 1e-9:
            # on the edge between strips e-1 and e: inside only if both contain the point
            row = ivs[e - 1].intersection(ivs[e]) if 0 < e < ns else empty
            s_up[j], s_dn[j] = min(max(e + 1, 0), ns + 1), min(max(e, 0), ns + 1)
            strips_here = [e - 1, e]
        else:
            k = math.floor(u)
            row = ivs[k] if 0 <= k < ns else empty
            s_up[j] = s_dn[j] = min(max(k + 1, 0), ns + 1)
            strips_here = [k]
        ins, lk, tp, tn = _line_ops(row, i0, nx, h)
        inside[j], link_x[j], theta[E, j], theta[W, j] = ins, lk, tp, tn
        if wall_mode == "node":
            for s in strips_here:
                if 0 <= s < ns:
                    for x in cuts[s]:
                        wall_node[j] |= ins & (xs >= x - h / 2) & (xs < x + h / 2)

    # vertical distances to the first strip that misses the column
    cols = np.arange(nx)[None, :]
    y_top = dom.y0 + (up[s_up[:, None], cols] - 1) * dom.dy
    y_bot = dom.y0 + dn[s_dn[:, None], cols] * dom.dy
    Y = ys[:, None]
    th_n = np.clip((y_top - Y) / h, THETA_MIN, 1.0)
    th_s = np.clip((Y - y_bot) / h, THETA_MIN, 1.0)
    theta[N] = np.where(inside, th_n, 1.0)
    theta[S] = np.where(inside, th_s, 1.0)
    reach = (y_top[:-1] - Y[1:]) > 1e-12 * h
    link_y = inside[:-1] & inside[1:] & reach
    slit = _slits(dom, xs, ys, h, link_x) if wall_mode == "cut" and dom.walls else None
    return GridMask(float(h), (i0 * h, j0 * h), inside, wall_node, link_x, link_y, theta, slit)


def _slits(dom: StripDomain, xs: np.ndarray, ys: np.ndarray, h: float, link_x: np.ndarray) -> np.ndarray | None:
    slit = np.zeros((3,) + link_x.shape)
    slit[1:] = 1.0
    for w in dom.walls:
        s0, s1 = w.active_extent()
        if s1 <= s0:
            continue
        ya, yb = dom.y0 + s0 * dom.dy, dom.y0 + s1 * dom.dy
        i = int(np.searchsorted(xs, w.x, side="left")) - 1  # xs[i] < x <= xs[i+1]
        if not 0 <= i < len(xs) - 1:
            continue
        cover = np.clip(np.minimum(yb, ys + h / 2) - np.maximum(ya, ys - h / 2), 0.0, h) / h
        cover = np.where(link_x[:, i], cover, 0.0)
        slit[0, :, i] = np.minimum(1.0, slit[0, :, i] + cover)
        slit[1, :, i] = (w.x - xs[i]) / h
        slit[2, :, i] = (xs[i + 1] - w.x) / h
    slit[1:] = np.clip(slit[1:], THETA_MIN, 1.0)
    return slit if slit[0].any() else None


def rasterize_polygon(p: Polygon, h: float, bbox=None) -> GridMask:
    """Lattice mask of a polygon with exact boundary distances in both directions."""
    i0, nx, j0, ny = _lattice(bbox or p.bbox(), h)
    inside = np.zeros((ny, nx), dtype=bool)
    link_x = np.zeros((ny, nx - 1), dtype=bool)
    theta = np.ones((4, ny, nx))
    for j in range(ny):
        inside[j], link_x[j], theta[E, j], theta[W, j] = _line_ops(section(p, (j0 + j) * h), i0, nx, h)
    q = rotate(p, math.pi / 2)  # (x, y) -> (y, -x)
    col_in = np.zeros((ny, nx), dtype=bool)
    link_y = np.zeros((ny - 1, nx), dtype=bool)
    for i in range(nx):
        col_in[:, i], link_y[:, i], theta[N, :, i], theta[S, :, i] = _line_ops(
            section(q, -(i0 + i) * h), j0, ny, h
        )
    inside &= col_in
    link_x &= inside[:, :-1] & inside[:, 1:]
    link_y &= inside[:-1] & inside[1:]
    return GridMask(float(h), (i0 * h, j0 * h), inside, np.zeros_like(inside), link_x, link_y, theta)


# ---------------------------------------------------------------------------
# solvers


def laplacian(g: GridMask) -> tuple[sp.csr_matrix, np.ndarray]:
    """Discrete ``-Laplace`` on the free nodes (scaled by ``1/h^2``) and the node index map."""
    free = g.free
    idx = np.full(free.shape, -1, dtype=np.int64)
    idx[free] = np.arange(int(free.sum()))
    lx = g.link_x & free[:, :-1] & free[:, 1:]
    ly = g.link_y & free[:-1] & free[1:]
    ny, nx = free.shape
    linked = np.zeros((4, ny, nx), dtype=bool)
    linked[E, :, :-1] = lx
    linked[W, :, 1:] = lx
    linked[N, :-1, :] = ly
    linked[S, 1:, :] = ly
    diag = np.where(linked, 1.0, 1.0 / g.theta).sum(axis=0)
    wx = np.ones(lx.shape)
    if g.slit is not None:
        cov = np.where(lx, g.slit[0], 0.0)
        wx -= cov
        diag[:, :-1] += cov * (1.0 / g.slit[1] - 1.0)
        diag[:, 1:] += cov * (1.0 / g.slit[2] - 1.0)
    diag = diag[free]
    lx = lx & (wx > 0)
    ja, ia = np.nonzero(lx)
    a = idx[ja, ia]
    b = idx[ja, ia + 1]
    jb, ib = np.nonzero(ly)
    c = idx[jb, ib]
    d = idx[jb + 1, ib]
    rows = np.concatenate([np.arange(len(diag)), a, b, c, d])
    cols = np.concatenate([np.arange(len(diag)), b, a, d, c])
    wa = wx[ja, ia]
    vals = np.concatenate([diag, -wa, -wa, -np.ones(2 * len(c))])
    n = len(diag)
    A = sp.csr_matrix((vals / g.h ** 2, (rows, cols)), shape=(n, n))
    return A, idx


def _field(g: GridMask, idx: np.ndarray, v: np.ndarray) -> np.ndarray:
    u = np.zeros(idx.shape)
    u[idx >= 0] = v[idx[idx >= 0]]
    return u


def torsion_solve(g: GridMask, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Solve ``-Lap u = 1`` by conjugate gradients; returns ``(T, u)`` with ``T = h^2 sum u``."""
    A, idx = laplacian(g)
    n = A.shape[0]
    b = np.ones(n)
    dinv = 1.0 / A.diagonal()
    M = spla.LinearOperator((n, n), matvec=lambda r: dinv * r.ravel(), dtype=float)
    maxiter = max(int(50 * math.sqrt(n)), 100)
    v, info = spla.cg(A, b, rtol=tol, atol=0.0, maxiter=maxiter, M=M)
    res = np.linalg.norm(b - A @ v) / np.linalg.norm(b)
    if info != 0 or res > 10 * tol:
        raise SolverError(f"CG did not converge (info={info}, residual={res:.3e})")
    u = _field(g, idx, v)
    return float(g.h ** 2 * u.sum()), u


def eigen_solve(g: GridMask, tol: float = 1e-8, max_iter: int = 20000) -> tuple[float, np.ndarray]:
    """Smallest Dirichlet eigenvalue by inverse power iteration from the all-ones vector.

    Inner solves reuse one sparse LU factorization.  The returned eigenvalue
    is the Rayleigh quotient of the returned field, which is non-negative
    with ``h * ||u||_2 = 1``.
    """
    A, idx = laplacian(g)
    n = A.shape[0]
    if n == 0:
        raise SolverError("no free nodes")
    try:
        solve = spla.splu(A.tocsc()).solve
    except RuntimeError as exc:  # singular factor
        raise SolverError(f"factorization failed: {exc}") from exc
    v = np.ones(n) / math.sqrt(n)
    lam_prev = math.inf
    for _ in range(max_iter):
        w = solve(v)
        if not np.all(np.isfinite(w)):
            raise SolverError("inner solve produced non-finite values")
        v = w / np.linalg.norm(w)
        lam = float(v @ (A @ v))
        if abs(lam - lam_prev) <= tol * lam:
            break
        lam_prev = lam
    else:
        raise SolverError(f"inverse iteration did not converge in {max_iter} steps")
    if v.sum() < 0:
        v = -v
    v = v / (g.h * np.linalg.norm(v))
    lam = float(v @ (A @ v)) / float(v @ v)
    return lam, _field(g, idx, v)


def gamma_distance(g1: GridMask, g2: GridMask, tol: float = 1e-10) -> float:
    """``L2(D)`` distance between the torsion functions, both extended by zero."""
    if not g1.same_grid(g2):
        raise ValueError("masks live on different grids")
    _, u1 = torsion_solve(g1, tol)
    _, u2 = torsion_solve(g2, tol)
    return float(g1.h * np.sqrt(np.sum((u1 - u2) ** 2)))


def torsion_gap_l1(g_small: GridMask, g_big: GridMask, tol: float = 1e-10) -> float:
    """``L1`` distance of torsion functions for nested masks, which equals ``T_big - T_small``."""
    if not g_small.same_grid(g_big):
        raise ValueError("masks live on different grids")
    if np.any(g_small.free & ~g_big.free):
        raise ValueError("masks are not nested")
    t_small, u_small = torsion_solve(g_small, tol)
    t_big, u_big = torsion_solve(g_big, tol)
    l1 = float(g_big.h ** 2 * np.abs(u_big - u_small).sum())
    if abs(l1 - (t_big - t_small)) > 1e-8 * max(t_big, 1e-300):
        raise SolverError(f"L1 gap {l1} differs from torsion difference {t_big - t_small}")
    return l1


def write_field(path: str | Path, g: GridMask, u: np.ndarray) -> None:
    """Flat text dump of a nodal field, row-major from the bottom row."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nx={g.nx} ny={g.ny} h={g.h!r} origin={g.origin[0]!r},{g.origin[1]!r}\n")
        for row in u:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
