"""Planar polygons, their sections along a direction and the Steiner symmetral.

Everything here works in a *rotated frame*: a polygon is first rotated so the
symmetrization direction becomes the x-axis, sections are then horizontal
lines and the symmetral is symmetric about ``x = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "GeometryError",
    "Polygon",
    "Direction",
    "IntervalSet",
    "WallSegment",
    "StripDomain",
    "area",
    "rotate",
    "section",
    "section_length",
    "slice_polygon",
    "steiner_symmetrize",
    "symmetral",
    "diameter",
]

# merge tolerance for touching interval endpoints, relative to coordinate scale
TOUCH_RTOL = 1e-12


class GeometryError(ValueError):
    """Invalid polygon or strip data."""


def _signed_area(ring: np.ndarray) -> float:
    x, y = ring[:, 0], ring[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _orient(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _edges(ring: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return ring, np.roll(ring, -1, axis=0)


def _edges_cross(p0, p1, q0, q1) -> np.ndarray:
    """Pairwise closed-segment intersection test, shape (len(p0), len(q0))."""
    ax, ay = p0[:, None, 0], p0[:, None, 1]
    bx, by = p1[:, None, 0], p1[:, None, 1]
    cx, cy = q0[None, :, 0], q0[None, :, 1]
    dx, dy = q1[None, :, 0], q1[None, :, 1]
    d1 = _orient(cx, cy, dx, dy, ax, ay)
    d2 = _orient(cx, cy, dx, dy, bx, by)
    d3 = _orient(ax, ay, bx, by, cx, cy)
    d4 = _orient(ax, ay, bx, by, dx, dy)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)

    def on_seg(ox, oy, ex, ey, px, py, d):
        return (d == 0) & (np.minimum(ox, ex) <= px) & (px <= np.maximum(ox, ex)) & (
            np.minimum(oy, ey) <= py) & (py <= np.maximum(oy, ey))

    touch = (
        on_seg(cx, cy, dx, dy, ax, ay, d1)
        | on_seg(cx, cy, dx, dy, bx, by, d2)
        | on_seg(ax, ay, bx, by, cx, cy, d3)
        | on_seg(ax, ay, bx, by, dx, dy, d4)
    )
    return proper | touch


def _point_in_ring(px: float, py: float, ring: np.ndarray) -> bool:
    a, b = _edges(ring)
    cond = (a[:, 1] > py) != (b[:, 1] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = a[:, 0] + (py - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
    return bool(np.count_nonzero(cond & (px < xc)) % 2)


def _check_simple(ring: np.ndarray, k: int) -> None:
    n = len(ring)
    a, b = _edges(ring)
    hit = _edges_cross(a, b, a, b)
    idx = np.arange(n)
    hit[idx, idx] = False
    hit[idx, (idx + 1) % n] = False
    hit[(idx + 1) % n, idx] = False
    if hit.any():
        i, j = np.argwhere(hit)[0]
        raise GeometryError(f"ring {k} is not simple: edges {i} and {j} intersect")


@dataclass(frozen=True)
class Polygon:
    """A planar domain bounded by vertex rings.

    ``rings[0]`` is the outer boundary (counterclockwise).  Later clockwise
    rings are holes; later counterclockwise rings are further disjoint
    components, which is how multi-component domains such as two separate
    rectangles are written.
    """

    rings: tuple[np.ndarray, ...]

    def __init__(self, rings: Iterable[Sequence[Sequence[float]]], validate: bool = True):
        arrs = tuple(np.array(r, dtype=float).reshape(-1, 2) for r in rings)
        for r in arrs:
            r.setflags(write=False)
        object.__setattr__(self, "rings", arrs)
        if validate:
            self.validate()

    def validate(self) -> None:
        if not self.rings:
            raise GeometryError("polygon has no rings")
        for k, r in enumerate(self.rings):
            if len(r) < 3:
                raise GeometryError(f"ring {k} has {len(r)} vertices, need at least 3")
            if not np.all(np.isfinite(r)):
                raise GeometryError(f"ring {k} has non-finite coordinates")
            _check_simple(r, k)
        areas = [_signed_area(r) for r in self.rings]
        if areas[0] <= 0:
            raise GeometryError("outer ring must be counterclockwise")
        outers = [k for k, s in enumerate(areas) if s > 0]
        holes = [k for k, s in enumerate(areas) if s < 0]
        if len(outers) + len(holes) != len(areas):
            raise GeometryError("degenerate ring with zero area")
        for i in range(len(self.rings)):
            for j in range(i + 1, len(self.rings)):
                a0, a1 = _edges(self.rings[i])
                b0, b1 = _edges(self.rings[j])
                if _edges_cross(a0, a1, b0, b1).any():
                    raise GeometryError(f"rings {i} and {j} intersect")
        for k in holes:
            px, py = self.rings[k][0]
            owners = [o for o in outers if _point_in_ring(px, py, self.rings[o])]
            if len(owners) != 1:
                raise GeometryError(f"hole ring {k} is not inside exactly one outer ring")
            for q in holes:
                if q != k and _point_in_ring(px, py, self.rings[q]):
                    raise GeometryError(f"hole ring {k} lies inside hole ring {q}")
        for k in outers:
            px, py = self.rings[k][0]
            for o in outers:
                if o != k and _point_in_ring(px, py, self.rings[o]):
                    raise GeometryError(f"outer ring {k} is nested inside outer ring {o}")
        if sum(areas) <= 0:
            raise GeometryError("polygon has non-positive area")

    @property
    def vertices(self) -> np.ndarray:
        return np.concatenate(self.rings)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        starts, ends = zip(*(_edges(r) for r in self.rings))
        return np.concatenate(starts), np.concatenate(ends)

    def bbox(self) -> tuple[float, float, float, float]:
        v = self.vertices
        return float(v[:, 0].min()), float(v[:, 0].max()), float(v[:, 1].min()), float(v[:, 1].max())

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon([r + (dx, dy) for r in self.rings], validate=False)

    def scaled(self, s: float) -> "Polygon":
        return Polygon([r * s for r in self.rings], validate=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polygon) or len(self.rings) != len(other.rings):
            return NotImplemented if not isinstance(other, Polygon) else False
        return all(a.shape == b.shape and np.array_equal(a, b) for a, b in zip(self.rings, other.rings))

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Direction:
    """Symmetrization direction, stored as an angle in ``[0, pi)``."""

    angle: float

    def __post_init__(self):
        a = math.fmod(float(self.angle), math.pi)
        if a < 0:
            a += math.pi
        if a >= math.pi:
            a = 0.0
        object.__setattr__(self, "angle", a)

    @classmethod
    def coerce(cls, d: "Direction | float") -> "Direction":
        return d if isinstance(d, Direction) else cls(d)

    @property
    def vector(self) -> tuple[float, float]:
        return math.cos(self.angle), math.sin(self.angle)


@dataclass(frozen=True)
class IntervalSet:
    """Finite union of open intervals with disjoint closures, sorted."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        iv = tuple((float(a), float(b)) for a, b in self.intervals)
        for a, b in iv:
            if not a < b:
                raise GeometryError(f"empty or reversed interval ({a}, {b})")
        for (_, b), (a, _) in zip(iv, iv[1:]):
            if not b < a:
                raise GeometryError(f"intervals not separated: {b} >= {a}")
        object.__setattr__(self, "intervals", iv)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]], tol: float | None = None) -> "IntervalSet":
        """Normalize arbitrary pairs: drop empty ones, merge overlapping or touching ones."""
        ps = sorted((float(a), float(b)) for a, b in pairs if b > a)
        if not ps:
            return cls(())
        if tol is None:
            scale = max(1.0, max(abs(v) for p in ps for v in p))
            tol = TOUCH_RTOL * scale
        out = [list(ps[0])]
        for a, b in ps[1:]:
            if a <= out[-1][1] + tol:
                out[-1][1] = max(out[-1][1], b)
            else:
                out.append([a, b])
        return cls(tuple((a, b) for a, b in out))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def length(self) -> float:
        return math.fsum(b - a for a, b in self.intervals)

    @property
    def barycenters(self) -> np.ndarray:
        return np.array([(a + b) / 2 for a, b in self.intervals])

    @property
    def radii(self) -> np.ndarray:
        return np.array([(b - a) / 2 for a, b in self.intervals])

    def endpoints(self) -> np.ndarray:
        return np.array(self.intervals, dtype=float).reshape(-1, 2)

    def contains(self, x) -> np.ndarray:
        """Vectorized open membership test."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x > a) & (x < b)
        return out

    def split_at(self, points: Iterable[float]) -> "IntervalSet":
        """Remove the given points; intervals containing one are split in two."""
        pts = sorted(points)
        if not pts:
            return self
        out = []
        for a, b in self.intervals:
            cur = a
            for p in pts:
                if cur < p < b:
                    out.append((cur, p))
                    cur = p
            out.append((cur, b))
        # pieces sharing a cut point touch; keep them apart by construction
        return IntervalSet._unchecked(tuple(out))

    def intersection(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        A, B = self.intervals, other.intervals
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if lo < hi:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet._unchecked(tuple(out))

    def scaled(self, c: float) -> "IntervalSet":
        return IntervalSet._unchecked(tuple((a * c, b * c) for a, b in self.intervals))

    def centered(self) -> "IntervalSet":
        L = self.length
        return IntervalSet(((-L / 2, L / 2),)) if L > 0 else IntervalSet(())

    @classmethod
    def _unchecked(cls, iv: tuple[tuple[float, float], ...]) -> "IntervalSet":
        # used for cut pieces that share endpoints, which the public invariant forbids
        obj = object.__new__(cls)
        object.__setattr__(obj, "intervals", iv)
        return obj


@dataclass(frozen=True)
class WallSegment:
    """A slit at abscissa ``x`` across strips ``strip_lo..strip_hi`` (inclusive).

    ``eta`` is the shrink progress: 0 is the full wall, 1 means it is gone.
    """

    x: float
    strip_lo: int
    strip_hi: int
    eta: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        if self.strip_lo > self.strip_hi:
            raise GeometryError("wall strip range is empty")
        if not 0.0 <= self.eta <= 1.0:
            raise GeometryError(f"wall eta {self.eta} outside [0, 1]")

    @property
    def span(self) -> int:
        return self.strip_hi - self.strip_lo + 1

    def active_range(self) -> range:
        """Strips still constrained: the central ``(1 - eta)`` fraction, rounded down."""
        n = int(math.floor((1.0 - self.eta) * self.span + 1e-12))
        n = min(n, self.span)
        lo = self.strip_lo + (self.span - n) // 2
        return range(lo, lo + n)

    def active_extent(self) -> tuple[float, float]:
        """The central ``(1 - eta)`` part of the wall in continuous strip coordinates."""
        half = 0.5 * (1.0 - self.eta) * self.span
        mid = self.strip_lo + 0.5 * self.span
        return mid - half, mid + half


@dataclass(frozen=True)
class StripDomain:
    """A planar set cut into horizontal strips of height ``dy``, one IntervalSet each.

    Coordinates are in the frame rotated by ``-frame_angle``.  ``walls`` are
    slits that exist only as Dirichlet constraints; they do not change the
    intervals.
    """

    y0: float
    dy: float
    strips: tuple[IntervalSet, ...]
    walls: tuple[WallSegment, ...] = ()
    frame_angle: float = 0.0
    time: float = 0.0

    def __post_init__(self):
        if not self.dy > 0:
            raise GeometryError("strip height must be positive")
        object.__setattr__(self, "strips", tuple(self.strips))
        object.__setattr__(self, "walls", tuple(self.walls))
        for w in self.walls:
            if w.strip_lo < 0 or w.strip_hi >= len(self.strips):
                raise GeometryError("wall outside strip range")

    @property
    def n_strips(self) -> int:
        return len(self.strips)

    def y_mid(self, s: int | np.ndarray):
        return self.y0 + (np.asarray(s) + 0.5) * self.dy

    @property
    def lengths(self) -> np.ndarray:
        return np.array([s.length for s in self.strips])

    @property
    def area(self) -> float:
        return math.fsum(self.dy * s.length for s in self.strips)

    def bbox(self) -> tuple[float, float, float, float]:
        ends = [v for s in self.strips for iv in s for v in iv]
        if not ends:
            raise GeometryError("strip domain is empty")
        rows = [k for k, s in enumerate(self.strips) if s]
        return (min(ends), max(ends), self.y0 + rows[0] * self.dy, self.y0 + (rows[-1] + 1) * self.dy)

    def constrained(self) -> list[tuple[float, range]]:
        """Active wall pieces as (abscissa, strip range)."""
        return [(w.x, w.active_range()) for w in self.walls if w.eta < 1.0]

    def with_walls(self, walls: Iterable[WallSegment]) -> "StripDomain":
        return replace(self, walls=tuple(walls))

    def rectangles(self) -> np.ndarray:
        """All (a, b, ylo, yhi) strip rectangles."""
        rows = [
            (a, b, self.y0 + k * self.dy, self.y0 + (k + 1) * self.dy)
            for k, s in enumerate(self.strips)
            for a, b in s
        ]
        return np.array(rows, dtype=float).reshape(-1, 4)


# ---------------------------------------------------------------------------
# operations


def area(p: Polygon) -> float:
    """Shoelace area of all outer rings minus holes."""
    a = math.fsum(_signed_area(r) for r in p.rings)
    if _signed_area(p.rings[0]) <= 0:
        raise GeometryError("outer ring must be counterclockwise")
    return a


def rotate(p: Polygon, d: Direction | float) -> Polygon:
    """Rotate by ``-angle`` about the origin so that ``d`` becomes the x-axis."""
    a = Direction.coerce(d).angle
    if a == 0.0:
        return p
    c, s = math.cos(a), math.sin(a)
    R = np.array([[c, -s], [s, c]])  # transpose of rotation by +a
    return Polygon([r @ R for r in p.rings], validate=False)


def section(p: Polygon, y: float) -> IntervalSet:
    """Open x-intervals of the horizontal line at height ``y`` inside ``p``.

    An edge counts its lower endpoint but not its upper one, so a line through
    a vertex is crossed once or not at all.
    """
    a, b = p.edges()
    y0, y1 = a[:, 1], b[:, 1]
    hit = ((y0 <= y) & (y < y1)) | ((y1 <= y) & (y < y0))
    if not hit.any():
        return IntervalSet(())
    a, b = a[hit], b[hit]
    xs = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
    xs.sort()
    if len(xs) % 2:
        raise GeometryError(f"odd number of crossings at y={y}")
    return IntervalSet.from_pairs(zip(xs[0::2], xs[1::2]))


def section_length(p: Polygon, y: float) -> float:
    return section(p, y).length


def diameter(p: Polygon) -> float:
    v = p.vertices
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


def _sample_heights(p: Polygon, n_strips: int) -> tuple[float, float, np.ndarray]:
    _, _, ymin, ymax = p.bbox()
    dy = (ymax - ymin) / n_strips
    ys = ymin + (np.arange(n_strips) + 0.5) * dy
    a, b = p.edges()
    flat = a[:, 1] == b[:, 1]
    if flat.any():
        tol = 1e-12 * max(1.0, abs(ymin), abs(ymax))
        hy = a[flat, 1]
        on = np.abs(ys[:, None] - hy[None, :]).min(axis=1) <= tol
        ys = np.where(on, ys + dy * 1e-9, ys)
    return ymin, dy, ys


def slice_polygon(p: Polygon, d: Direction | float = 0.0, n_strips: int = 256) -> StripDomain:
    """Cut ``p`` into strips along ``d``; each strip holds the section at its midline."""
    if n_strips < 8:
        raise GeometryError("need at least 8 strips")
    d = Direction.coerce(d)
    q = rotate(p, d)
    if area(q) <= 0:
        raise GeometryError("empty polygon")
    ymin, dy, ys = _sample_heights(q, n_strips)
    return StripDomain(ymin, dy, tuple(section(q, y) for y in ys), frame_angle=d.angle)


def symmetral(dom: StripDomain) -> StripDomain:
    """Replace every strip by the centered interval of the same length."""
    return replace(dom, strips=tuple(s.centered() for s in dom.strips), walls=())


def steiner_symmetrize(p: Polygon, d: Direction | float = 0.0, n_strips: int = 256) -> StripDomain:
    """Steiner symmetral of ``p`` with respect to ``d``, sampled on strips."""
    return symmetral(slice_polygon(p, d, n_strips))
