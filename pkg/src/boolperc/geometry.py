"""Exact geometric predicates, spatial hashing and union-find.

Convention notes (fixed project-wide):

* disc-disc adjacency is *open* overlap: ``dist(centers) < r_i + r_j``,
  so tangent discs are not connected;
* a disc touches a box side iff the closed disc meets the closed side
  segment (``dist <= r``);
* a disc "meets" a rectangle iff its interior does (``dist(center, rect)
  < r``).

Tangency configurations have probability zero under the sampler, so these
choices never conflict on random inputs; fixtures are chosen away from
predicate boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with ``x0 < x1`` and ``y0 < y1``."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("Rect requires x0 < x1 and y0 < y1")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains_rect(self, other: "Rect") -> bool:
        return (
            self.x0 <= other.x0
            and self.y0 <= other.y0
            and self.x1 >= other.x1
            and self.y1 >= other.y1
        )

    def contains_point(self, px: float, py: float) -> bool:
        return self.x0 <= px <= self.x1 and self.y0 <= py <= self.y1

    def pad(self, margin: float) -> "Rect":
        return Rect(self.x0 - margin, self.y0 - margin, self.x1 + margin, self.y1 + margin)

    @staticmethod
    def square(cx: float, cy: float, half: float) -> "Rect":
        return Rect(cx - half, cy - half, cx + half, cy + half)


def square_rect(cx: float, cy: float, half: float) -> Rect:
    """The sup-norm ball of radius ``half`` around ``(cx, cy)``."""
    return Rect.square(cx, cy, half)


class UnionFind:
    """Array union-find with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)
        self.n_components = n

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.size[ri] < self.size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]
        self.n_components -= 1

    def labels(self) -> np.ndarray:
        return np.array([self.find(i) for i in range(len(self.parent))], dtype=np.int64)


def candidate_pairs(
    x: np.ndarray, y: np.ndarray, r: np.ndarray, cell: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i < j) whose bounding boxes share a spatial hash cell.

    Every truly overlapping pair shares a cell, since discs are inserted
    into all cells their bounding box meets.  Cell size defaults to the
    90th percentile radius; heavy tails would starve single-cell schemes.
    """
    n = len(x)
    if n < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    if cell is None:
        cell = float(max(np.percentile(r, 90), 1e-9))
    inv = 1.0 / cell
    ix0 = np.floor((x - r) * inv).astype(np.int64)
    ix1 = np.floor((x + r) * inv).astype(np.int64)
    iy0 = np.floor((y - r) * inv).astype(np.int64)
    iy1 = np.floor((y + r) * inv).astype(np.int64)
    # Clamp giant discs to the populated part of the grid.  Safe: two
    # overlapping discs share a point on the segment between their centers,
    # which lies inside the global center bounding box.
    gx0 = int(math.floor(x.min() * inv))
    gx1 = int(math.floor(x.max() * inv))
    gy0 = int(math.floor(y.min() * inv))
    gy1 = int(math.floor(y.max() * inv))
    np.clip(ix0, gx0, gx1, out=ix0)
    np.clip(ix1, gx0, gx1, out=ix1)
    np.clip(iy0, gy0, gy1, out=iy0)
    np.clip(iy1, gy0, gy1, out=iy1)
    buckets: dict[tuple[int, int], list[int]] = {}
    for k in range(n):
        for cx in range(ix0[k], ix1[k] + 1):
            for cy in range(iy0[k], iy1[k] + 1):
                buckets.setdefault((cx, cy), []).append(k)
    seen: set[int] = set()
    out_i: list[int] = []
    out_j: list[int] = []
    for members in buckets.values():
        m = len(members)
        if m < 2:
            continue
        for a in range(m):
            ia = members[a]
            for b in range(a + 1, m):
                jb = members[b]
                i, j = (ia, jb) if ia < jb else (jb, ia)
                key = i * n + j
                if key not in seen:
                    seen.add(key)
                    out_i.append(i)
                    out_j.append(j)
    return np.asarray(out_i, dtype=np.int64), np.asarray(out_j, dtype=np.int64)


def overlap_pairs(
    x: np.ndarray, y: np.ndarray, r: np.ndarray, cell: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Pairs of discs with open overlap."""
    i, j = candidate_pairs(x, y, r, cell)
    if len(i) == 0:
        return i, j
    d2 = (x[i] - x[j]) ** 2 + (y[i] - y[j]) ** 2
    keep = d2 < (r[i] + r[j]) ** 2
    return i[keep], j[keep]


def component_labels(n: int, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Connected component labels (root index per disc) from edge lists."""
    uf = UnionFind(n)
    for a, b in zip(i.tolist(), j.tolist()):
        uf.union(a, b)
    return uf.labels()


def dist2_point_rect(px, py, rect: Rect):
    """Squared distance from point(s) to a closed rectangle; vectorizable."""
    dx = np.maximum(np.maximum(rect.x0 - px, px - rect.x1), 0.0)
    dy = np.maximum(np.maximum(rect.y0 - py, py - rect.y1), 0.0)
    return dx * dx + dy * dy


def dist2_point_segment(px, py, ax: float, ay: float, bx: float, by: float):
    """Squared distance from point(s) to the closed segment AB."""
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0:
        return (px - ax) ** 2 + (py - ay) ** 2
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / denom, 0.0, 1.0)
    qx, qy = ax + t * dx, ay + t * dy
    return (px - qx) ** 2 + (py - qy) ** 2


def _segment_disc_interval(
    ax: float, ay: float, bx: float, by: float, cx: float, cy: float, r: float
) -> tuple[float, float] | None:
    """Open parameter interval of AB strictly inside the open disc, or None."""
    dx, dy = bx - ax, by - ay
    fx, fy = ax - cx, ay - cy
    a = dx * dx + dy * dy
    c = fx * fx + fy * fy - r * r
    if a == 0.0:
        return (0.0, 1.0) if c < 0 else None
    b = 2.0 * (fx * dx + fy * dy)
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:
        return None
    sq = math.sqrt(disc)
    t0 = max((-b - sq) / (2.0 * a), 0.0)
    t1 = min((-b + sq) / (2.0 * a), 1.0)
    if t0 < t1:
        return (t0, t1)
    return None


def lens_meets_rect(
    x1: float, y1: float, r1: float, x2: float, y2: float, r2: float, rect: Rect
) -> bool:
    """Whether the intersection of two open discs meets a closed rectangle.

    Exhaustive finite case analysis: a lens vertex inside the rectangle, the
    lens midpoint inside (covers lens-inside-rect), or a rectangle edge
    passing through the lens interior (covers partial overlap and
    rect-inside-lens).  Degenerate containment reduces to disc-vs-rect.
    """
    dx, dy = x2 - x1, y2 - y1
    d2 = dx * dx + dy * dy
    rsum = r1 + r2
    if d2 >= rsum * rsum:
        return False
    d = math.sqrt(d2)
    if d <= abs(r1 - r2):
        # lens is the smaller disc
        if r1 <= r2:
            return dist2_point_rect(x1, y1, rect) < r1 * r1
        return dist2_point_rect(x2, y2, rect) < r2 * r2
    ux, uy = dx / d, dy / d
    a = (d2 + r1 * r1 - r2 * r2) / (2.0 * d)
    h = math.sqrt(max(r1 * r1 - a * a, 0.0))
    bx_, by_ = x1 + a * ux, y1 + a * uy
    for s in (h, -h):
        if rect.contains_point(bx_ - s * uy, by_ + s * ux):
            return True
    t = (d - r2 + r1) / 2.0  # midpoint of the lens along the center line
    if rect.contains_point(x1 + t * ux, y1 + t * uy):
        return True
    edges = (
        (rect.x0, rect.y0, rect.x1, rect.y0),
        (rect.x1, rect.y0, rect.x1, rect.y1),
        (rect.x1, rect.y1, rect.x0, rect.y1),
        (rect.x0, rect.y1, rect.x0, rect.y0),
    )
    for ax, ay, bx, by in edges:
        i1 = _segment_disc_interval(ax, ay, bx, by, x1, y1, r1)
        if i1 is None:
            continue
        i2 = _segment_disc_interval(ax, ay, bx, by, x2, y2, r2)
        if i2 is None:
            continue
        if min(i1[1], i2[1]) - max(i1[0], i2[0]) > 0.0:
            return True
    return False
