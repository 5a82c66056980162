"""Circuits and necklaces: discs surrounding a protected ball.

Surround detection uses cumulative-angle propagation over the intersection
graph: every non-tree edge whose angle discrepancy is a nonzero multiple of
2*pi certifies a winding loop.  Chords between centers of overlapping discs
lie in their union, and all candidate discs avoid the protected ball, so a
winding cycle yields a genuine occupied loop around it.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .connectivity import WindowInsufficientError, rasterize, _CROSS_STRUCTURE
from .geometry import Rect, overlap_pairs
from .sampler import Configuration

from scipy import ndimage


def _adjacency(n: int, pi: np.ndarray, pj: np.ndarray) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(pi.tolist(), pj.tolist()):
        adj[a].append(b)
        adj[b].append(a)
    return adj


def _winding_search(
    xs: np.ndarray, ys: np.ndarray, adj: list[list[int]]
) -> tuple[np.ndarray, np.ndarray] | None:
    """Find a component with a winding loop around the origin.

    Returns (component member indices, loop-certificate indices) or None.
    The certificate is the union of the two tree paths closing the
    discrepant edge: a connected subset that still winds.
    """
    n = len(xs)
    visited = np.zeros(n, dtype=bool)
    theta = np.zeros(n)
    parent = np.full(n, -1, dtype=np.int64)
    for start in range(n):
        if visited[start]:
            continue
        comp = [start]
        visited[start] = True
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                delta = math.atan2(
                    xs[u] * ys[v] - ys[u] * xs[v],
                    xs[u] * xs[v] + ys[u] * ys[v],
                )
                if not visited[v]:
                    visited[v] = True
                    theta[v] = theta[u] + delta
                    parent[v] = u
                    comp.append(v)
                    queue.append(v)
                elif abs(theta[u] + delta - theta[v]) > math.pi:
                    loop = set()
                    for node in (u, v):
                        w = node
                        while w != -1:
                            loop.add(w)
                            w = parent[w]
                    return np.asarray(comp, dtype=np.int64), np.asarray(
                        sorted(loop), dtype=np.int64
                    )
    return None


def _surrounds(xs: np.ndarray, ys: np.ndarray, rs: np.ndarray) -> bool:
    """Whether the union of the given discs winds around the origin."""
    if len(xs) < 3:
        return False
    pi_, pj_ = overlap_pairs(xs, ys, rs)
    if len(pi_) == 0:
        return False
    return _winding_search(xs, ys, _adjacency(len(xs), pi_, pj_)) is not None


def _angular_span(xs: np.ndarray, ys: np.ndarray) -> float:
    """Angular extent of points as seen from the origin."""
    ang = np.sort(np.arctan2(ys, xs))
    if len(ang) < 2:
        return 0.0
    gaps = np.diff(ang)
    wrap = 2.0 * math.pi - (ang[-1] - ang[0])
    return 2.0 * math.pi - max(gaps.max(), wrap)


@dataclass(frozen=True)
class SurroundResult:
    """A component of ball-avoiding discs that winds around the ball."""

    component: np.ndarray  # config disc indices of the whole component
    loop: np.ndarray  # config disc indices of a winding certificate


def surrounding_component(config: Configuration, L: float) -> SurroundResult | None:
    """Find a component of discs disjoint from B(0, L) that surrounds it.

    Returns None when no sampled component surrounds.  A "none" verdict is
    uncertifiable (raises ``WindowInsufficientError``) if some candidate
    component sticks out of the window while wrapping more than a half turn
    around the ball: such a component could close a circuit outside the
    sampled region.
    """
    if not L > 0:
        raise ValueError("L must be positive")
    win = config.window
    if not win.contains_rect(Rect.square(0.0, 0.0, L)):
        raise WindowInsufficientError("window does not contain the protected ball")
    sel = np.flatnonzero(config.x**2 + config.y**2 > (L + config.r) ** 2)
    if len(sel) == 0:
        return None
    xs, ys, rs = config.x[sel], config.y[sel], config.r[sel]
    pi_, pj_ = overlap_pairs(xs, ys, rs)
    found = _winding_search(xs, ys, _adjacency(len(sel), pi_, pj_))
    if found is not None:
        comp, loop = found
        return SurroundResult(component=sel[comp], loop=sel[loop])
    # certify the negative verdict
    outside = (
        (xs - rs < win.x0) | (xs + rs > win.x1)
        | (ys - rs < win.y0) | (ys + rs > win.y1)
    )
    if outside.any():
        from .geometry import component_labels

        labels = component_labels(len(sel), pi_, pj_)
        for lab in np.unique(labels[outside]):
            members = labels == lab
            if _angular_span(xs[members], ys[members]) > math.pi:
                raise WindowInsufficientError(
                    "a boundary-touching component wraps more than a half "
                    "turn; absence of a circuit cannot be certified"
                )
    return None


@dataclass(frozen=True)
class Necklace:
    """A removal-minimal blocking sequence of discs around B(0, L).

    Discs are sorted by nonincreasing radius.  ``degenerate`` flags the
    (geometrically impossible for ball-avoiding discs) single-disc case.
    """

    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    L: float
    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        if len(self.r) == 0:
            raise ValueError("empty necklace")
        if np.any(np.diff(self.r) > 0):
            raise ValueError("necklace radii must be nonincreasing")

    @property
    def k(self) -> int:
        return len(self.r)

    @property
    def degenerate(self) -> bool:
        return self.k < 2


def second_radius(necklace: Necklace) -> float:
    """Radius of the second largest disc (the largest one if degenerate)."""
    if necklace.degenerate:
        return float(necklace.r[0])
    return float(necklace.r[1])


def _prune_to_minimal(
    xs: np.ndarray, ys: np.ndarray, rs: np.ndarray, keep: np.ndarray, largest_first: bool
) -> np.ndarray:
    """Greedy removal to a removal-minimal surrounding subset."""
    current = list(keep)
    changed = True
    while changed:
        changed = False
        order = sorted(current, key=lambda i: rs[i], reverse=largest_first)
        for idx in order:
            trial = [i for i in current if i != idx]
            if len(trial) >= 3 and _surrounds(xs[trial], ys[trial], rs[trial]):
                current = trial
                changed = True
    return np.asarray(current, dtype=np.int64)


def extract_necklace(
    config: Configuration, L: float, order: str = "largest_first"
) -> Necklace | None:
    """Extract a removal-minimal necklace around B(0, L), if one exists.

    ``order`` selects the greedy pruning order: ``largest_first`` removes
    big discs eagerly (small second radius), ``smallest_first`` keeps them
    (maximizing the second radius).
    """
    if order not in ("largest_first", "smallest_first"):
        raise ValueError(f"unknown pruning order {order!r}")
    found = surrounding_component(config, L)
    if found is None:
        return None
    idx = found.loop
    xs, ys, rs = config.x[idx], config.y[idx], config.r[idx]
    local = np.arange(len(idx))
    if not _surrounds(xs, ys, rs):  # fall back to the full component
        idx = found.component
        xs, ys, rs = config.x[idx], config.y[idx], config.r[idx]
        local = np.arange(len(idx))
    minimal = _prune_to_minimal(xs, ys, rs, local, order == "largest_first")
    sort = minimal[np.argsort(-rs[minimal], kind="stable")]
    return Necklace(
        x=xs[sort], y=ys[sort], r=rs[sort], L=L, indices=idx[sort]
    )


@dataclass(frozen=True)
class NecklaceReport:
    """Validation verdicts for the three necklace conditions."""

    two_components: bool  # complement has exactly two components
    avoids_and_surrounds: bool  # disjoint from the ball and winds around it
    minimal: bool  # every single-disc removal breaks the surround
    n_pockets: int  # extra bounded complement components found
    grid_h: float

    @property
    def all_pass(self) -> bool:
        return self.two_components and self.avoids_and_surrounds and self.minimal


def validate_necklace(
    necklace: Necklace, config: Configuration, grid_h: float = 0.05
) -> NecklaceReport:
    """Check the necklace conditions; the complement count uses a raster."""
    xs, ys, rs, L = necklace.x, necklace.y, necklace.r, necklace.L
    avoids = bool(np.all(xs**2 + ys**2 > (L + rs) ** 2))
    surrounds = _surrounds(xs, ys, rs)
    minimal = True
    for drop in range(len(xs)):
        trial = np.delete(np.arange(len(xs)), drop)
        if _surrounds(xs[trial], ys[trial], rs[trial]):
            minimal = False
            break
    n_pockets, two_comps = _complement_components(xs, ys, rs, grid_h)
    return NecklaceReport(
        two_components=two_comps,
        avoids_and_surrounds=avoids and surrounds,
        minimal=minimal,
        n_pockets=n_pockets,
        grid_h=grid_h,
    )


def _complement_components(
    xs: np.ndarray, ys: np.ndarray, rs: np.ndarray, h: float
) -> tuple[int, bool]:
    """Count bounded complement components of the disc union on a raster.

    Returns (number of pockets, whether the complement has exactly two
    components: one bounded region containing the origin and the outside).
    Border-touching raster labels are merged: they are all connected
    through the exterior.
    """
    margin = float(rs.max()) + 4.0 * h
    box = Rect(
        float((xs - rs).min()) - margin,
        float((ys - rs).min()) - margin,
        float((xs + rs).max()) + margin,
        float((ys + rs).max()) + margin,
    )
    for attempt in range(3):
        pitch = h / (2.0**attempt)
        mask = _raster_discs(xs, ys, rs, box, pitch)
        # vacant phase gets 8-connectivity, dual to 4-connected occupancy;
        # avoids spurious pockets in the wedges where two discs cross
        labeled, _ = ndimage.label(~mask, structure=np.ones((3, 3), dtype=bool))
        border = np.unique(
            np.concatenate(
                [labeled[0, :], labeled[-1, :], labeled[:, 0], labeled[:, -1]]
            )
        )
        border = set(border[border > 0].tolist())
        interior = [
            lab for lab in np.unique(labeled) if lab > 0 and lab not in border
        ]
        ny, nx = labeled.shape
        ox = min(max(int((0.0 - box.x0) / (box.width / nx)), 0), nx - 1)
        oy = min(max(int((0.0 - box.y0) / (box.height / ny)), 0), ny - 1)
        origin_label = labeled[oy, ox]
        if origin_label == 0 or origin_label in border:
            continue  # raster too coarse near the origin; refine
        pockets = len(interior) - 1
        return pockets, pockets == 0
    return -1, False


def _raster_discs(
    xs: np.ndarray, ys: np.ndarray, rs: np.ndarray, box: Rect, h: float
) -> np.ndarray:
    nx = max(int(round(box.width / h)), 2)
    ny = max(int(round(box.height / h)), 2)
    hx, hy = box.width / nx, box.height / ny
    gx = box.x0 + (np.arange(nx) + 0.5) * hx
    gy = box.y0 + (np.arange(ny) + 0.5) * hy
    mask = np.zeros((ny, nx), dtype=bool)
    for cx, cy, radius in zip(xs, ys, rs):
        i0 = max(int((cx - radius - box.x0) / hx) - 1, 0)
        i1 = min(int((cx + radius - box.x0) / hx) + 2, nx)
        j0 = max(int((cy - radius - box.y0) / hy) - 1, 0)
        j1 = min(int((cy + radius - box.y0) / hy) + 2, ny)
        if i0 >= i1 or j0 >= j1:
            continue
        dx = gx[i0:i1] - cx
        dy = gy[j0:j1] - cy
        mask[j0:j1, i0:i1] |= dy[:, None] ** 2 + dx[None, :] ** 2 < radius * radius
    return mask


def grid_ball_blocked(
    config: Configuration, L: float, h: float = 0.1, window: Rect | None = None
) -> bool:
    """Raster oracle: is B(0, L) cut off from the window boundary by discs?

    True iff no vacant 4-connected raster path joins a cell meeting the
    ball to the window border (a fully covered ball counts as blocked).
    """
    box = window if window is not None else config.window
    mask = rasterize(config, box, h)
    # 8-connectivity for the vacant phase, dual to 4-connected occupancy
    labeled, _ = ndimage.label(~mask, structure=np.ones((3, 3), dtype=bool))
    ny, nx = labeled.shape
    hx, hy = box.width / nx, box.height / ny
    gx = box.x0 + (np.arange(nx) + 0.5) * hx
    gy = box.y0 + (np.arange(ny) + 0.5) * hy
    ball = (gy[:, None] ** 2 + gx[None, :] ** 2) <= L * L
    seeds = np.unique(labeled[ball & (labeled > 0)])
    if seeds.size == 0:
        return True
    border = np.unique(
        np.concatenate([labeled[0, :], labeled[-1, :], labeled[:, 0], labeled[:, -1]])
    )
    border = border[border > 0]
    return not bool(np.intersect1d(seeds, border).size)


def big_disc_count(config: Configuration, r: float, s: float) -> int:
    """Number of discs of radius >= r at Euclidean distance in (0, s] of 0."""
    if not (r > 0 and s > 0):
        raise ValueError("r and s must be positive")
    if not config.window.contains_rect(Rect.square(0.0, 0.0, s)):
        raise WindowInsufficientError("window does not cover B(0, s)")
    if config.n == 0:
        return 0
    dist = np.hypot(config.x, config.y) - config.r
    return int(np.sum((config.r >= r) & (dist > 0.0) & (dist <= s)))


def two_big_discs_event(config: Configuration, r: float, s: float) -> bool:
    """At least two large discs near (but not covering) the origin."""
    return big_disc_count(config, r, s) >= 2


def necklace_band_event(config: Configuration, L: float, a: float, b: float) -> bool:
    """Does some extracted necklace have second radius in [a, b]?

    The existential quantifier over all necklaces is approximated from
    below by two greedy extractions (largest-first and smallest-first
    pruning); see module notes.
    """
    if not (0.0 <= a <= b):
        raise ValueError("need 0 <= a <= b")
    for order in ("largest_first", "smallest_first"):
        neck = extract_necklace(config, L, order=order)
        if neck is not None and not neck.degenerate:
            if a <= second_radius(neck) <= b:
                return True
    return False
