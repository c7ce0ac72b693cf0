"""Planar convex geometry on complex numbers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySet

COLLINEAR_TOL = 1e-12


@dataclass(frozen=True)
class ConvexPolygon:
    """Counter-clockwise hull vertices; ``degenerate`` is None, "point" or "segment"."""

    vertices: np.ndarray
    degenerate: str | None = None

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        v = self.vertices
        return v, np.roll(v, -1)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points, collinear_tol: float = COLLINEAR_TOL) -> ConvexPolygon:
    """Andrew's monotone chain.

    A middle point is dropped when the turn it makes has cross product at most
    ``collinear_tol * scale**2``, with ``scale`` the larger side of the
    bounding box, so nearly collinear points never become vertices.
    """
    z = np.asarray(points, dtype=np.complex128).ravel()
    if len(z) == 0:
        raise EmptySet("convex hull of an empty set")
    xs, ys = z.real, z.imag
    scale = max(np.ptp(xs), np.ptp(ys))
    if scale == 0.0:
        return ConvexPolygon(z[:1].copy(), "point")
    thr = collinear_tol * scale * scale
    pts = sorted(set(zip(xs.tolist(), ys.tolist())))

    def chain(seq):
        out = []
        for p in seq:
            while len(out) > 1 and _cross(out[-2], out[-1], p) <= thr:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    v = np.array([complex(x, y) for x, y in hull])
    if len(v) <= 2:
        return ConvexPolygon(v, "segment")
    return ConvexPolygon(v, None)


def segment_distance(z, a, b) -> np.ndarray:
    """Distance from each z to the segment [a, b] (broadcasting)."""
    z = np.asarray(z, dtype=np.complex128)
    d = b - a
    dd = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(dd > 0, np.real((z - a) * np.conj(d)) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return point_distances(z, a + t * d)


def boundary_distance(hull: ConvexPolygon, z) -> np.ndarray:
    """Distance from each z to the boundary curve of the hull."""
    z = np.asarray(z, dtype=np.complex128).ravel()
    v = hull.vertices
    if hull.degenerate == "point":
        return point_distances(z, v[0])
    if hull.degenerate == "segment":
        return segment_distance(z, v[0], v[-1])
    a, b = hull.edges()
    out = np.empty(len(z))
    step = max(1, 4_000_000 // len(v))
    for s in range(0, len(z), step):
        zz = z[s:s + step, None]
        out[s:s + step] = segment_distance(zz, a[None, :], b[None, :]).min(axis=1)
    return out


def inside(hull: ConvexPolygon, z) -> np.ndarray:
    """True where z lies in the closed polygon (signed-area half-plane test)."""
    z = np.asarray(z, dtype=np.complex128).ravel()
    if hull.degenerate is not None:
        return boundary_distance(hull, z) == 0.0
    a, b = hull.edges()
    out = np.empty(len(z), dtype=bool)
    step = max(1, 4_000_000 // len(a))
    for s in range(0, len(z), step):
        zz = z[s:s + step, None]
        cr = np.imag(np.conj(b - a)[None, :] * (zz - a[None, :]))
        out[s:s + step] = np.all(cr >= 0.0, axis=1)
    return out


def hull_distance(hull: ConvexPolygon, z) -> np.ndarray:
    """Euclidean distance from each z to the closed hull (0 inside)."""
    d = boundary_distance(hull, z)
    if hull.degenerate is None:
        d = np.where(inside(hull, z), 0.0, d)
    return d


def hull_contains(hull: ConvexPolygon, z, eps: float = 0.0):
    """Whether z is within ``eps`` of the hull; vectorised over z."""
    d = hull_distance(hull, z)
    return bool(d[0] <= eps) if np.ndim(z) == 0 else d <= eps


def hull_hausdorff(p: ConvexPolygon, q: ConvexPolygon) -> float:
    """Hausdorff distance between two convex polygons (as filled regions).

    Distance to a convex set is convex, so each directed distance is attained
    at a vertex.
    """
    return float(max(hull_distance(q, p.vertices).max(), hull_distance(p, q.vertices).max()))


def point_distances(a, b) -> np.ndarray:
    """|a - b| with broadcasting, as sqrt(dx^2 + dy^2).

    Every step is a correctly rounded IEEE operation, so results are the same
    on every platform (unlike hypot, whose accuracy is library dependent).
    """
    d = np.asarray(a) - np.asarray(b)
    return np.sqrt(d.real * d.real + d.imag * d.imag)


def _directed(a: np.ndarray, b: np.ndarray) -> float:
    worst = 0.0
    step = max(1, 4_000_000 // len(b))
    for s in range(0, len(a), step):
        d = point_distances(a[s:s + step, None], b[None, :]).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst


def hausdorff(a, b) -> float:
    """Hausdorff distance between finite point sets."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if len(a) == 0 or len(b) == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    return max(_directed(a, b), _directed(b, a))


def _has_matching(ok: np.ndarray) -> bool:
    n = ok.shape[0]
    match = [-1] * n

    def augment(i, seen):
        for j in np.flatnonzero(ok[i]):
            if not seen[j]:
                seen[j] = True
                if match[j] < 0 or augment(match[j], seen):
                    match[j] = i
                    return True
        return False

    return all(augment(i, [False] * n) for i in range(n))


def multiset_distance(a, b) -> float:
    """Bottleneck distance between equal-size multisets.

    The smallest t such that some bijection moves no point by more than t.
    """
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if len(a) != len(b):
        raise DimensionMismatch(f"multisets of sizes {len(a)} and {len(b)}")
    if len(a) == 0:
        raise EmptySet("multiset distance of empty sets")
    d = point_distances(a[:, None], b[None, :])
    cand = np.unique(d)
    lo, hi = 0, len(cand) - 1
    # the greedy value along (re, im) order is achievable; start the search there
    greedy = float(np.max(point_distances(np.sort_complex(a), np.sort_complex(b))))
    hi = int(np.searchsorted(cand, greedy))
    hi = min(hi, len(cand) - 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_matching(d <= cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cand[lo])
