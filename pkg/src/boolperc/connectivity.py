"""Exact connectivity queries on unions of discs.

Crossing events use within-box path semantics: clipped discs are convex, so
``(D_i ∩ box) ∩ (D_j ∩ box) = D_i ∩ D_j ∩ box`` and within-box adjacency
reduces to "lens meets box".  Vacant crossings are computed by planar
duality.  A rasterized flood-fill oracle is provided for verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .geometry import (
    Rect,
    component_labels,
    dist2_point_rect,
    dist2_point_segment,
    lens_meets_rect,
    overlap_pairs,
)
from .sampler import Configuration, truncate

Box = Rect

_CROSS_STRUCTURE = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


class WindowInsufficientError(RuntimeError):
    """The sampled window is too small to certify the queried event."""


@dataclass
class DiscGraph:
    """Intersection graph of a configuration with component labels."""

    config: Configuration
    edges_i: np.ndarray
    edges_j: np.ndarray
    labels: np.ndarray

    @property
    def n_components(self) -> int:
        return len(np.unique(self.labels)) if len(self.labels) else 0


def build_graph(config: Configuration) -> DiscGraph:
    """Spatial-hash adjacency (open overlap) plus union-find labels."""
    i, j = overlap_pairs(config.x, config.y, config.r)
    labels = component_labels(config.n, i, j)
    return DiscGraph(config, i, j, labels)


def _axis_arrays(config: Configuration, box: Box, axis: str):
    """Swap coordinates for vertical queries so crossings are left-right."""
    if axis == "horizontal":
        return config.x, config.y, box
    if axis == "vertical":
        return config.y, config.x, Rect(box.y0, box.x0, box.y1, box.x1)
    raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")


def occupied_crossing(config: Configuration, box: Box, axis: str = "horizontal") -> bool:
    """Whether the occupied set crossed the box between the two `axis` sides.

    True iff a connected component of (occupied set) ∩ box meets both
    opposite sides; paths must stay inside the box.
    """
    x, y, b = _axis_arrays(config, box, axis)
    r = config.r
    if len(x) == 0:
        return False
    sel = np.flatnonzero(dist2_point_rect(x, y, b) < r * r)
    if len(sel) == 0:
        return False
    xs, ys, rs = x[sel], y[sel], r[sel]
    left = dist2_point_segment(xs, ys, b.x0, b.y0, b.x0, b.y1) <= rs * rs
    right = dist2_point_segment(xs, ys, b.x1, b.y0, b.x1, b.y1) <= rs * rs
    if not left.any() or not right.any():
        return False
    if (left & right).any():
        return True
    i, j = overlap_pairs(xs, ys, rs)
    if len(i):
        # lens automatically inside the box when either disc is
        inside = (
            (xs - rs >= b.x0) & (xs + rs <= b.x1)
            & (ys - rs >= b.y0) & (ys + rs <= b.y1)
        )
        easy = inside[i] | inside[j]
        hard = np.flatnonzero(~easy)
        keep = np.ones(len(i), dtype=bool)
        for k in hard:
            a, c = i[k], j[k]
            keep[k] = lens_meets_rect(
                xs[a], ys[a], rs[a], xs[c], ys[c], rs[c], b
            )
        i, j = i[keep], j[keep]
    labels = component_labels(len(sel), i, j)
    return bool(np.intersect1d(labels[left], labels[right]).size)


def vacant_crossing(config: Configuration, box: Box, axis: str = "horizontal") -> bool:
    """Whether the vacant set crosses the box along ``axis``.

    Computed by planar duality: a vacant horizontal crossing exists iff
    there is no occupied vertical crossing, and symmetrically.
    """
    dual = "vertical" if axis == "horizontal" else "horizontal"
    if axis not in ("horizontal", "vertical"):
        raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")
    return not occupied_crossing(config, box, dual)


def _require_window(config: Configuration, region: Rect) -> None:
    if not config.window.contains_rect(region):
        raise WindowInsufficientError(
            f"window {config.window} does not contain required region {region}"
        )


def _arm_flags(
    config: Configuration, x0: float, y0: float, ell: float, L: float
) -> tuple[np.ndarray, np.ndarray]:
    inner = Rect.square(x0, y0, ell)
    touch = dist2_point_rect(config.x, config.y, inner) <= config.r**2
    escape = (np.abs(config.x - x0) + config.r > L) | (
        np.abs(config.y - y0) + config.r > L
    )
    return touch, escape


def arm_event(
    config: Configuration,
    x: tuple[float, float],
    ell: float,
    L: float,
    radius_cap: float | None = None,
    graph: DiscGraph | None = None,
) -> bool:
    """Connection from the sup-norm ball Λ(x, ell) to outside Λ(x, L).

    Whole-plane adjacency; only sampled discs count.  With ``radius_cap``
    the occupied set is restricted to discs of radius at most the cap.
    A pre-built ``graph`` (matching the cap) may be supplied for reuse.
    """
    if not (L >= ell > 0):
        raise ValueError("need L >= ell > 0")
    x0, y0 = x
    _require_window(config, Rect.square(x0, y0, L))
    if graph is None:
        sub = truncate(config, radius_cap) if radius_cap is not None else config
        graph = build_graph(sub)
    sub = graph.config
    if sub.n == 0:
        return False
    touch, escape = _arm_flags(sub, x0, y0, ell, L)
    if not touch.any() or not escape.any():
        return False
    return bool(np.intersect1d(graph.labels[touch], graph.labels[escape]).size)


def e_event(config: Configuration, ell: float, L: float) -> bool:
    """Grid form of the far-field escape event.

    True iff some lattice site ``y`` in ``ell * Z^2`` with ``|y| >= L - ell``
    has an occupied connection (radii capped at ``ell``) from Λ(y, ell) to
    outside Λ(y, |y| - ell).  Only sites whose outer box fits in the window
    are testable; if none exist the window is insufficient.
    """
    if not (L >= ell > 0):
        raise ValueError("need L >= ell > 0")
    win = config.window
    imin = int(math.floor(win.x0 / ell))
    imax = int(math.ceil(win.x1 / ell))
    jmin = int(math.floor(win.y0 / ell))
    jmax = int(math.ceil(win.y1 / ell))
    sites = []
    for i in range(imin, imax + 1):
        for j in range(jmin, jmax + 1):
            yx, yy = i * ell, j * ell
            rho = math.hypot(yx, yy)
            if rho < L - ell or rho - ell < ell:
                continue
            if win.contains_rect(Rect.square(yx, yy, rho - ell)):
                sites.append((yx, yy, rho))
    if not sites:
        raise WindowInsufficientError(
            "no testable lattice sites: window too small for the event scale"
        )
    graph = build_graph(truncate(config, ell))
    if graph.config.n == 0:
        return False
    for yx, yy, rho in sites:
        if arm_event(config, (yx, yy), ell, rho - ell, radius_cap=ell, graph=graph):
            return True
    return False


def renorm_field(
    config: Configuration,
    ell: float,
    lattice_box: tuple[int, int, int, int],
) -> np.ndarray:
    """Coarse-grained escape indicators X(y) on an integer lattice rectangle.

    ``lattice_box = (ix0, iy0, ix1, iy1)`` (inclusive).  X(y) = 1 iff there
    is a capped-radius connection from Λ(ell*y, ell) to outside
    Λ(ell*y, 3*ell).  Shape is (ny, nx), row y first.
    """
    ix0, iy0, ix1, iy1 = lattice_box
    if ix1 < ix0 or iy1 < iy0:
        raise ValueError("empty lattice box")
    for ix, iy in ((ix0, iy0), (ix1, iy1), (ix0, iy1), (ix1, iy0)):
        _require_window(config, Rect.square(ix * ell, iy * ell, 4.0 * ell))
    graph = build_graph(truncate(config, ell))
    out = np.zeros((iy1 - iy0 + 1, ix1 - ix0 + 1), dtype=np.int8)
    if graph.config.n == 0:
        return out
    sub = graph.config
    for iy in range(iy0, iy1 + 1):
        for ix in range(ix0, ix1 + 1):
            touch, escape = _arm_flags(sub, ix * ell, iy * ell, ell, 3.0 * ell)
            if touch.any() and escape.any():
                hit = np.intersect1d(graph.labels[touch], graph.labels[escape]).size
                out[iy - iy0, ix - ix0] = 1 if hit else 0
    return out


def rasterize(config: Configuration, box: Box, h: float) -> np.ndarray:
    """Occupancy grid over the box: cell True iff its center is in a disc."""
    if not h > 0:
        raise ValueError("h must be positive")
    nx = max(int(round(box.width / h)), 2)
    ny = max(int(round(box.height / h)), 2)
    hx, hy = box.width / nx, box.height / ny
    xs = box.x0 + (np.arange(nx) + 0.5) * hx
    ys = box.y0 + (np.arange(ny) + 0.5) * hy
    mask = np.zeros((ny, nx), dtype=bool)
    for cx, cy, radius in zip(config.x, config.y, config.r):
        if dist2_point_rect(cx, cy, box) >= radius * radius:
            continue
        i0 = max(int((cx - radius - box.x0) / hx) - 1, 0)
        i1 = min(int((cx + radius - box.x0) / hx) + 2, nx)
        j0 = max(int((cy - radius - box.y0) / hy) - 1, 0)
        j1 = min(int((cy + radius - box.y0) / hy) + 2, ny)
        if i0 >= i1 or j0 >= j1:
            continue
        dx = xs[i0:i1] - cx
        dy = ys[j0:j1] - cy
        mask[j0:j1, i0:i1] |= (
            dy[:, None] ** 2 + dx[None, :] ** 2 < radius * radius
        )
    return mask


def grid_oracle(
    config: Configuration,
    box: Box,
    h: float,
    phase: str = "occupied",
    axis: str = "horizontal",
) -> bool:
    """Brute-force crossing decision by flood fill on a rasterized box."""
    if phase not in ("occupied", "vacant"):
        raise ValueError(f"phase must be 'occupied' or 'vacant', got {phase!r}")
    mask = rasterize(config, box, h)
    if phase == "vacant":
        mask = ~mask
    labeled, _ = ndimage.label(mask, structure=_CROSS_STRUCTURE)
    if axis == "horizontal":
        a, b = labeled[:, 0], labeled[:, -1]
    elif axis == "vertical":
        a, b = labeled[0, :], labeled[-1, :]
    else:
        raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")
    common = np.intersect1d(a[a > 0], b[b > 0])
    return bool(common.size)
