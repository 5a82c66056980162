"""Finite-window realizations of the marked Poisson process.

Windows are padded so that discs centered outside but reaching inside are
captured, with a certified bound on the expected number of missed discs.
Thinning uses a stateless per-disc hash, giving the monotone coupling the
threshold bisection relies on.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Iterator, NamedTuple

import numpy as np

from .geometry import Rect
from .laws import AnyLaw, DivergentMomentError, SlicedLaw, moment_is_finite
from .stats import Estimate

Window = Rect


class Disc(NamedTuple):
    cx: float
    cy: float
    radius: float


@dataclass(frozen=True)
class Configuration:
    """A finite realization of the marked Poisson process.

    ``lam0`` is the intensity the disc bank was sampled at; ``lam`` is the
    current intensity after thinning (``lam <= lam0``).  ``ids`` are the
    original sampling indices, preserved across thinning and truncation so
    retention decisions stay coupled.
    """

    x: np.ndarray
    y: np.ndarray
    r: np.ndarray
    ids: np.ndarray
    window: Window
    lam: float
    lam0: float
    law: AnyLaw
    seed: int
    pad: float
    missed_bound: float

    @property
    def n(self) -> int:
        return len(self.x)

    def discs(self) -> Iterator[Disc]:
        for cx, cy, radius in zip(self.x, self.y, self.r):
            yield Disc(float(cx), float(cy), float(radius))

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.x, self.y, self.r, self.ids):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    def scaled(self, s: float) -> "Configuration":
        """All centers and radii scaled by ``s > 0`` (for invariance tests)."""
        if not s > 0:
            raise ValueError("scale must be positive")
        win = Rect(self.window.x0 * s, self.window.y0 * s, self.window.x1 * s, self.window.y1 * s)
        return replace(
            self, x=self.x * s, y=self.y * s, r=self.r * s, window=win,
            pad=self.pad * s, lam=self.lam / (s * s), lam0=self.lam0 / (s * s),
            law=self.law.rescaled(s),
        )


def replicate_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """Counter-based stream keyed by (seed, replicate index)."""
    if index is None:
        ss = np.random.SeedSequence(seed)
    else:
        ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def _center_intensity(law: AnyLaw, lam: float) -> float:
    if isinstance(law, SlicedLaw):
        return lam * law.intensity_factor
    return lam


def missed_disc_bound(law: AnyLaw, lam: float, window: Window, pad: float) -> float:
    """Expected number of discs reaching the window but centered beyond pad.

    ``lam * int_pad^inf (w + 2z)(h + 2z) mu(dz)`` with the tail taken open
    at ``pad`` (an atom exactly at the padding radius is captured).
    """
    base = law.base if isinstance(law, SlicedLaw) else law
    lam_c = _center_intensity(law, lam)
    w, h = window.width, window.height
    tm = base.tail_mass(pad, strict=True)
    pm1 = base.partial_moment(pad, 1, strict=True)
    pm2 = base.partial_moment(pad, 2, strict=True)
    if math.isinf(pm2):
        return math.inf
    return lam_c * (w * h * tm + 2.0 * (w + h) * pm1 + 4.0 * pm2)


def padding_radius(law: AnyLaw, lam: float, window: Window, eps: float) -> float:
    """Smallest radius on the grid ``{2^k * scale}`` certifying ``eps``.

    Raises ``DivergentMomentError`` when no finite padding exists (infinite
    second moment); use an explicit ``pad`` in that regime.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if not moment_is_finite(law, 2):
        raise DivergentMomentError(
            "no finite padding radius: infinite second moment; "
            "pass an explicit pad (explicit-truncation mode)"
        )
    z_ref = law.scale
    for k in range(-30, 80):
        pad = z_ref * 2.0**k
        if missed_disc_bound(law, lam, window, pad) <= eps:
            return pad
    raise RuntimeError("padding search failed to converge")


def sample_configuration(
    law: AnyLaw,
    lam: float,
    window: Window,
    seed: int,
    eps: float = 1e-3,
    pad: float | None = None,
) -> Configuration:
    """Sample discs in the padded window; deterministic given the seed.

    With ``pad=None`` the padding radius is chosen automatically; an
    explicit ``pad`` enables the truncated regime for laws with infinite
    second moment (``missed_bound`` is then reported as ``inf``).
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if pad is None:
        pad = padding_radius(law, lam, window, eps) if lam > 0 else law.scale
    missed = missed_disc_bound(law, lam, window, pad)
    rng = replicate_rng(seed)
    padded = window.pad(pad)
    lam_c = _center_intensity(law, lam)
    n = int(rng.poisson(lam_c * padded.area)) if lam > 0 else 0
    x = rng.uniform(padded.x0, padded.x1, size=n)
    y = rng.uniform(padded.y0, padded.y1, size=n)
    r = law.sample_many(rng, n)
    ids = np.arange(n, dtype=np.uint64)
    return Configuration(
        x=x, y=y, r=r, ids=ids, window=window, lam=lam, lam0=lam,
        law=law, seed=seed, pad=pad, missed_bound=missed,
    )


def _splitmix64(v: np.ndarray) -> np.ndarray:
    z = v + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _retention_uniforms(seed: int, ids: np.ndarray) -> np.ndarray:
    key = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    mixed = _splitmix64(ids.astype(np.uint64) ^ _splitmix64(np.full_like(ids, key)))
    return mixed.astype(np.float64) / 2.0**64


def thin(config: Configuration, lam_new: float) -> Configuration:
    """Independent retention down to intensity ``lam_new``.

    Deterministic per-disc hash of (seed, disc id), so retained sets are
    nested across intensities: monotone coupling for bisection.
    """
    if not (0.0 <= lam_new <= config.lam):
        raise ValueError("thinning requires 0 <= lam_new <= config.lam")
    if lam_new == config.lam:
        return config
    old_err = np.seterr(over="ignore")
    try:
        u = _retention_uniforms(config.seed, config.ids)
    finally:
        np.seterr(**old_err)
    keep = u < lam_new / config.lam0
    return replace(
        config,
        x=config.x[keep], y=config.y[keep], r=config.r[keep],
        ids=config.ids[keep], lam=lam_new,
    )


def truncate(config: Configuration, ell: float) -> Configuration:
    """Keep exactly the discs with radius at most ``ell``."""
    if not ell > 0:
        raise ValueError("ell must be positive")
    keep = config.r <= ell
    return replace(
        config,
        x=config.x[keep], y=config.y[keep], r=config.r[keep], ids=config.ids[keep],
    )


def covered_mask(config: Configuration, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Whether each probe point lies in the occupied set (open discs)."""
    out = np.zeros(len(px), dtype=bool)
    if config.n == 0 or len(px) == 0:
        return out
    # discard discs that cannot reach the probe bounding box
    bx0, bx1 = px.min(), px.max()
    by0, by1 = py.min(), py.max()
    reach = (
        (config.x + config.r > bx0)
        & (config.x - config.r < bx1)
        & (config.y + config.r > by0)
        & (config.y - config.r < by1)
    )
    xs, ys, rs = config.x[reach], config.y[reach], config.r[reach]
    if len(xs) == 0:
        return out
    order = np.argsort(px, kind="stable")
    sx = px[order]
    for cx, cy, radius in zip(xs, ys, rs):
        lo = np.searchsorted(sx, cx - radius)
        hi = np.searchsorted(sx, cx + radius)
        if lo >= hi:
            continue
        idx = order[lo:hi]
        sub = (px[idx] - cx) ** 2 + (py[idx] - cy) ** 2 < radius * radius
        out[idx[sub]] = True
    return out


def vacant_fraction(
    config: Configuration, window: Window, n_probe: int, rng: np.random.Generator
) -> Estimate:
    """Monte Carlo estimate of the vacant area fraction of ``window``."""
    if n_probe < 1:
        raise ValueError("n_probe must be >= 1")
    px = rng.uniform(window.x0, window.x1, size=n_probe)
    py = rng.uniform(window.y0, window.y1, size=n_probe)
    vacant = ~covered_mask(config, px, py)
    return Estimate.from_counts(int(vacant.sum()), n_probe, config.seed)
