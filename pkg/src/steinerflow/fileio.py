"""Polygon text files, CSV tables and a small self-contained SVG plotter."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence, TextIO
from xml.sax.saxutils import escape

import numpy as np

from .diagram import PLANE, BallConstants, DiagramPoint, bfnt_upper, h_lower, kj_lower
from .geometry import GeometryError, Polygon, StripDomain
from .symflow import FlowSnapshot

__all__ = [
    "PolygonParseError",
    "parse_polygon",
    "read_polygon",
    "format_polygon",
    "write_polygon",
    "strips_csv",
    "snapshots_csv",
    "diagram_csv",
    "bounds_table",
    "bounds_csv",
    "diagram_svg",
]


class PolygonParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, source: str = "<string>"):
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {msg}")


def parse_polygon(text: str, source: str = "<string>") -> Polygon:
    """Parse one vertex ``x y`` per line; a blank line starts the next ring; ``#`` begins a comment."""
    rings: list[list[tuple[float, float]]] = []
    cur: list[tuple[float, float]] = []
    first_line: list[int] = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if raw.strip() == "" and cur:
                rings.append(cur)
                cur = []
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise PolygonParseError(f"expected two coordinates, got {line!r}", n, source)
        try:
            x, y = float(parts[0]), float(parts[1])
        except ValueError:
            raise PolygonParseError(f"not a number in {line!r}", n, source) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise PolygonParseError("non-finite coordinate", n, source)
        if not cur:
            first_line.append(n)
        cur.append((x, y))
    if cur:
        rings.append(cur)
    if not rings:
        raise PolygonParseError("no vertices", None, source)
    for r, ln in zip(rings, first_line):
        if len(r) < 3:
            raise PolygonParseError("ring needs at least 3 vertices", ln, source)
    try:
        return Polygon(rings)
    except GeometryError as exc:
        raise PolygonParseError(str(exc), None, source) from exc


def read_polygon(path: str | Path) -> Polygon:
    path = Path(path)
    return parse_polygon(path.read_text(encoding="utf-8"), str(path))


def format_polygon(p: Polygon, comment: str | None = None) -> str:
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    for k, ring in enumerate(p.rings):
        if k:
            out.append("")
        out.extend(f"{x:.17g} {y:.17g}" for x, y in ring)
    return "\n".join(out) + "\n"


def write_polygon(path: str | Path, p: Polygon, comment: str | None = None) -> None:
    Path(path).write_text(format_polygon(p, comment), encoding="utf-8")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "" if math.isnan(v) else f"{float(v):.17g}"
    return str(v)


def _table(header: Sequence[str], rows: Iterable[Sequence], fh: TextIO | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    s = buf.getvalue()
    if fh is not None:
        fh.write(s)
    return s


def strips_csv(dom: StripDomain) -> str:
    """One row per strip: midline height and the intervals as ``a:b`` pairs separated by spaces."""
    rows = []
    for y, s in zip(dom.y_mid(np.arange(dom.n_strips)), dom.strips):
        rows.append((float(y), " ".join(f"{a:.17g}:{b:.17g}" for a, b in s)))
    return _table(("y_mid", "intervals"), rows)


def snapshots_csv(snaps: Sequence[FlowSnapshot], c: BallConstants = PLANE) -> str:
    from .diagram import diagram_point

    rows = []
    for s in snaps:
        x = y = None
        if s.lam is not None and s.torsion is not None:
            p = diagram_point(s.lam, s.torsion, s.area, c)
            x, y = p.x, p.y
        rows.append((s.t_global, s.phase, s.area, s.n_walls, s.lam, s.torsion, x, y))
    return _table(("t_global", "phase", "area", "n_walls", "lambda", "torsion", "x", "y"), rows)


def diagram_csv(points: Sequence[DiagramPoint]) -> str:
    rows = [(p.x, p.y, p.d, p.source, p.t_global, p.n) for p in points]
    return _table(("x", "y", "d", "source", "t_global", "n"), rows)


def bounds_table(d: int = 2, samples: int = 101, c: BallConstants | None = None) -> np.ndarray:
    """Columns x, kj_lower, h_lower, bfnt_upper on a uniform grid of ``[0, 1]``."""
    if samples < 2:
        raise ValueError("need at least two samples")
    c = c or BallConstants.for_dimension(d)
    x = np.linspace(0.0, 1.0, samples)
    return np.column_stack([x, kj_lower(x, d), h_lower(x, d), bfnt_upper(x, c)])


def bounds_csv(d: int = 2, samples: int = 101, c: BallConstants | None = None) -> str:
    return _table(("x", "kj", "h_lower", "bfnt"), bounds_table(d, samples, c).tolist())


_COLORS = {"computed": "#c0392b", "analytic-family": "#2e86c1", "bound-curve": "#555555"}


def diagram_svg(
    points: Sequence[DiagramPoint] = (),
    d: int = 2,
    c: BallConstants | None = None,
    size: int = 480,
    title: str | None = None,
) -> str:
    """Unit square with the Kohler-Jobin and BFNT curves and a scatter of diagram points."""
    c = c or BallConstants.for_dimension(d)
    m = 48
    side = size - 2 * m

    def px(x, y):
        return m + x * side, size - m - y * side

    def path(xs, ys):
        xs = np.clip(xs, 0, 1)
        ys = np.clip(ys, 0, 1.2)
        return "M" + " L".join(f"{a:.2f},{b:.2f}" for a, b in (px(x, y) for x, y in zip(xs, ys)))

    xs = np.linspace(0.0, 1.0, 201)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    # shaded region between the two bounds
    lo = kj_lower(xs, d)
    hi = np.minimum(bfnt_upper(xs, c), 1.0)
    poly = " ".join(f"{a:.2f},{b:.2f}" for a, b in [px(x, y) for x, y in zip(xs, hi)] + [px(x, y) for x, y in zip(xs[::-1], lo[::-1])])
    out.append(f'<polygon points="{poly}" fill="#fdebd0" stroke="none"/>')
    x0, y0 = px(0, 0)
    x1, y1 = px(1, 1)
    out.append(
        f'<rect x="{x0:.2f}" y="{y1:.2f}" width="{side}" height="{side}" fill="none" stroke="black" stroke-width="1"/>'
    )
    for t in np.linspace(0, 1, 6):
        tx, _ = px(t, 0)
        _, ty = px(0, t)
        out.append(f'<text x="{tx:.2f}" y="{y0 + 16:.2f}" font-size="11" text-anchor="middle" font-family="sans-serif">{t:.1f}</text>')
        out.append(f'<text x="{x0 - 6:.2f}" y="{ty + 4:.2f}" font-size="11" text-anchor="end" font-family="sans-serif">{t:.1f}</text>')
    out.append(f'<path d="{path(xs, lo)}" fill="none" stroke="#1e8449" stroke-width="1.5"/>')
    out.append(f'<path d="{path(xs, bfnt_upper(xs, c))}" fill="none" stroke="#7d3c98" stroke-width="1.5"/>')
    for p in points:
        cx, cy = px(min(max(p.x, 0), 1.05), min(max(p.y, 0), 1.05))
        col = _COLORS.get(p.source, "black")
        r = 2.2 if p.source == "computed" else 1.2
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r}" fill="{col}"/>')
    out.append(f'<text x="{size / 2:.0f}" y="{size - 12}" font-size="12" text-anchor="middle" font-family="sans-serif">x</text>')
    out.append(f'<text x="14" y="{size / 2:.0f}" font-size="12" font-family="sans-serif">y</text>')
    if title:
        out.append(f'<text x="{size / 2:.0f}" y="24" font-size="13" text-anchor="middle" font-family="sans-serif">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
