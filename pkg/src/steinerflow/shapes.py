"""Built-in demo domains and random test polygons."""
from __future__ import annotations

import math

import numpy as np

from .geometry import Polygon

__all__ = ["DEMOS", "demo", "ushape", "two_rects", "disk", "disk64", "lshape", "rectangle", "two_disks", "random_star"]


def rectangle(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    return Polygon([[(x0, y0), (x1, y0), (x1, y1), (x0, y1)]])


def ushape() -> Polygon:
    """[0,3]^2 with the notch (1,2) x (1,3] removed; area 7."""
    return Polygon([[(0, 0), (3, 0), (3, 3), (2, 3), (2, 1), (1, 1), (1, 3), (0, 3)]])


def two_rects() -> Polygon:
    """Two unit squares side by side with a unit gap."""
    return Polygon([
        [(0, 0), (1, 0), (1, 1), (0, 1)],
        [(2, 0), (3, 0), (3, 1), (2, 1)],
    ])


def _circle(n: int, r: float = 1.0, cx: float = 0.0, cy: float = 0.0) -> list[tuple[float, float]]:
    t = 2 * np.pi * np.arange(n) / n
    return list(zip(cx + r * np.cos(t), cy + r * np.sin(t)))


def disk(n: int = 64, r: float = 1.0) -> Polygon:
    """Regular n-gon inscribed in the circle of radius ``r``."""
    return Polygon([_circle(n, r)])


def disk64() -> Polygon:
    return disk(64)


def two_disks(n: int = 256, r: float = 1.0, gap: float = 1.0) -> Polygon:
    """Two equal disjoint n-gons on the x axis, ``gap`` apart."""
    c = r + gap / 2
    return Polygon([_circle(n, r, -c), _circle(n, r, c)])


def lshape() -> Polygon:
    """[0,2]^2 minus [1,2]^2; area 3."""
    return Polygon([[(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]])


DEMOS = {"ushape": ushape, "two_rects": two_rects, "disk64": disk64, "lshape": lshape}


def demo(name: str) -> Polygon:
    try:
        return DEMOS[name]()
    except KeyError:
        raise KeyError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}") from None


def random_star(rng: np.random.Generator, n_min: int = 5, n_max: int = 14, r_min: float = 0.3) -> Polygon:
    """Random polygon that is star-shaped about the origin, hence simple."""
    n = int(rng.integers(n_min, n_max + 1))
    # jittered angles keep consecutive vertices well separated
    ang = (np.arange(n) + rng.uniform(0.1, 0.9, n)) * (2 * math.pi / n)
    rad = rng.uniform(r_min, 1.0, n)
    return Polygon([np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])])
