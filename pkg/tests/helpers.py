"""Independent reference implementations used by several test modules."""
import math

import numpy as np

from steinerflow.geometry import IntervalSet


def random_interval_sets(rng: np.random.Generator, count: int, max_k: int = 5) -> list[IntervalSet]:
    out = []
    while len(out) < count:
        k = int(rng.integers(1, max_k + 1))
        cuts = np.sort(rng.uniform(-5.0, 5.0, 2 * k))
        if np.min(np.diff(cuts)) < 1e-3:
            continue
        out.append(IntervalSet(tuple(zip(cuts[0::2], cuts[1::2]))))
    return out


def brute_force_flow(sets: list[IntervalSet], times: np.ndarray, dt: float = 1e-5) -> list[list[np.ndarray]]:
    """Explicit Euler on barycenters, merging clusters when they touch.

    All sets are stepped together; slot ``[i, j]`` holds the barycenter and
    half-length of the cluster that original interval ``j`` of set ``i``
    belongs to.  Returns the sorted endpoints of every set at every time.
    """
    n, kmax = len(sets), max(len(s) for s in sets)
    M = np.zeros((n, kmax))
    R = np.zeros((n, kmax))
    lab = np.tile(np.arange(kmax), (n, 1))
    valid = np.zeros((n, kmax), dtype=bool)
    for i, s in enumerate(sets):
        k = len(s)
        M[i, :k] = s.barycenters
        R[i, :k] = s.radii
        valid[i, :k] = True
    pair_ok = valid[:, 1:] & valid[:, :-1]

    def merge_touching():
        while True:
            touch = pair_ok & (lab[:, 1:] != lab[:, :-1]) & (M[:, 1:] - R[:, 1:] <= M[:, :-1] + R[:, :-1])
            if not touch.any():
                return
            for i, j in zip(*np.nonzero(touch)):
                a, b = lab[i, j], lab[i, j + 1]
                ma, ra, mb, rb = M[i, j], R[i, j], M[i, j + 1], R[i, j + 1]
                m = (ra * ma + rb * mb) / (ra + rb)
                sel = (lab[i] == a) | (lab[i] == b)
                M[i, sel], R[i, sel], lab[i, sel] = m, ra + rb, a
                break  # recompute touches after each fusion

    def snapshot():
        out = []
        for i in range(n):
            ends = []
            seen = set()
            for j in range(kmax):
                if valid[i, j] and lab[i, j] not in seen:
                    seen.add(lab[i, j])
                    ends += [M[i, j] - R[i, j], M[i, j] + R[i, j]]
            out.append(np.sort(ends))
        return out

    result = []
    t = 0.0
    for target in times:
        steps = int(round((target - t) / dt))
        for _ in range(steps):
            M *= 1.0 - dt
            merge_touching()
        t += steps * dt
        result.append(snapshot())
    return result


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def bisect_gap(dm: float, rsum: float, hi: float = 50.0) -> float:
    """Root of ``dm e^-t - rsum`` by plain bisection."""
    f = lambda t: dm * math.exp(-t) - rsum  # noqa: E731
    if f(0.0) <= 0:
        return 0.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
