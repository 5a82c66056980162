"""Monte Carlo harness: event estimates, threshold bisection, profiles.

Replicates are pure functions of (base seed, replicate index) via splittable
counter-based streams, so results are reproducible and independent of
scheduling.  Aggregation is plain counting, hence order-insensitive.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats as sstats

from . import laws as _laws
from .connectivity import (
    WindowInsufficientError,
    arm_event,
    build_graph,
    grid_oracle,
    occupied_crossing,
    renorm_field,
    vacant_crossing,
)
from .geometry import Rect
from .laws import AnyLaw, RadiusLaw, circuit_weight, circuit_weight_tail, big_disc_rate
from .sampler import Configuration, sample_configuration, thin, truncate
from .stats import Estimate, wilson_interval
from .topology import big_disc_count, extract_necklace, second_radius


class ThresholdError(RuntimeError):
    """Bisection could not bracket the target crossing probability."""


def derive_seed(seed: int, index: int) -> int:
    """Stable per-replicate seed from a base seed."""
    mix = np.uint64(0x9E3779B97F4A7C15)
    with np.errstate(over="ignore"):
        v = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + mix) * np.uint64(
            0xBF58476D1CE4E5B9
        )
        v = v ^ (v >> np.uint64(31))
        v = (v + np.uint64(index)) * np.uint64(0x94D049BB133111EB)
        v = v ^ (v >> np.uint64(29))
    return int(v)


# ---------------------------------------------------------------------------
# event descriptors


@dataclass(frozen=True)
class CrossingEvent:
    """Left-right crossing of the box [0, ell] x [0, aspect * ell]."""

    ell: float
    aspect: float = 3.0
    phase: str = "occupied"

    def __post_init__(self):
        if self.phase not in ("occupied", "vacant"):
            raise ValueError(f"bad phase {self.phase!r}")

    @property
    def box(self) -> Rect:
        return Rect(0.0, 0.0, self.ell, self.aspect * self.ell)

    def base_window(self) -> Rect:
        return self.box

    def evaluate(self, config: Configuration) -> bool:
        if self.phase == "occupied":
            return occupied_crossing(config, self.box, "horizontal")
        return vacant_crossing(config, self.box, "horizontal")


@dataclass(frozen=True)
class ArmEventSpec:
    """Connection from Λ(0, ell) to outside Λ(0, L), radii optionally capped."""

    ell: float
    L: float
    cap: float | None = None

    def base_window(self) -> Rect:
        return Rect.square(0.0, 0.0, self.L)

    def evaluate(self, config: Configuration) -> bool:
        return arm_event(config, (0.0, 0.0), self.ell, self.L, radius_cap=self.cap)


@dataclass(frozen=True)
class EscapeEventSpec:
    """Lattice escape event at scales (ell, L); window chosen as Λ(0, 2L)."""

    ell: float
    L: float

    def base_window(self) -> Rect:
        return Rect.square(0.0, 0.0, 2.0 * self.L)

    def evaluate(self, config: Configuration) -> bool:
        from .connectivity import e_event

        return e_event(config, self.ell, self.L)


@dataclass(frozen=True)
class BigDiscsEvent:
    """At least two discs of radius >= r within distance s of the origin."""

    r: float
    s: float

    def base_window(self) -> Rect:
        return Rect.square(0.0, 0.0, self.s)

    def evaluate(self, config: Configuration) -> bool:
        return big_disc_count(config, self.r, self.s) >= 2


@dataclass(frozen=True)
class GridCrossingEvent:
    """Flood-fill oracle counterpart of ``CrossingEvent``."""

    ell: float
    aspect: float = 3.0
    phase: str = "occupied"
    h: float = 0.02

    @property
    def box(self) -> Rect:
        return Rect(0.0, 0.0, self.ell, self.aspect * self.ell)

    def base_window(self) -> Rect:
        return self.box

    def evaluate(self, config: Configuration) -> bool:
        return grid_oracle(config, self.box, self.h, self.phase, "horizontal")


# ---------------------------------------------------------------------------
# generic Monte Carlo runner


@dataclass(frozen=True)
class MCRun:
    estimate: Estimate
    window_retries: int


def _run_indicator(fn: Callable[[int], bool], n: int, threads: int = 1) -> int:
    if threads <= 1:
        return sum(1 for i in range(n) if fn(i))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(1 for hit in pool.map(fn, range(n)) if hit)


def mc_estimate(
    law: AnyLaw,
    lam: float,
    event,
    n: int,
    seed: int,
    eps: float = 1e-3,
    pad: float | None = None,
    threads: int = 1,
    max_window_growth: int = 2,
) -> MCRun:
    """Estimate P[event] over ``n`` independent configurations.

    Window-insufficient replicates are re-drawn in a window enlarged by
    successive factors of 2, up to ``max_window_growth`` times.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    base = event.base_window()
    retries = [0]

    def one(i: int) -> bool:
        rep_seed = derive_seed(seed, i)
        cx = 0.5 * (base.x0 + base.x1)
        cy = 0.5 * (base.y0 + base.y1)
        for growth in range(max_window_growth + 1):
            factor = 2.0**growth
            win = Rect(
                cx + (base.x0 - cx) * factor,
                cy + (base.y0 - cy) * factor,
                cx + (base.x1 - cx) * factor,
                cy + (base.y1 - cy) * factor,
            )
            config = sample_configuration(law, lam, win, rep_seed, eps=eps, pad=pad)
            try:
                return event.evaluate(config)
            except WindowInsufficientError:
                retries[0] += 1
        raise WindowInsufficientError(
            f"replicate {i} still uncertifiable after {max_window_growth} growths"
        )

    k = _run_indicator(one, n, threads)
    return MCRun(Estimate.from_counts(k, n, seed), retries[0])


# ---------------------------------------------------------------------------
# threshold bisection


@dataclass(frozen=True)
class ThresholdResult:
    lambda_hat: float
    phase: str
    ell: float
    aspect: float
    target: float
    tol: float
    n_per_probe: int
    seed: int
    iterations: tuple = ()
    ci_width_at_root: float = math.nan

    def as_dict(self) -> dict:
        return {
            "lambda_hat": self.lambda_hat,
            "phase": self.phase,
            "ell": self.ell,
            "aspect": self.aspect,
            "target": self.target,
            "tol": self.tol,
            "n_per_probe": self.n_per_probe,
            "seed": self.seed,
            "ci_width_at_root": self.ci_width_at_root,
            "iterations": [list(it) for it in self.iterations],
        }


def _default_lambda_hi(law: AnyLaw) -> float:
    base = law.base if isinstance(law, _laws.SlicedLaw) else law
    ez2 = base.partial_moment(0.0, 2)
    if math.isinf(ez2):
        return 1.0
    # roughly twice the fully-occupied-regime intensity for unit coverage
    return 2.4 / (math.pi * ez2)


def threshold_bisect(
    law: AnyLaw,
    ell: float,
    phase: str = "occupied",
    aspect: float = 3.0,
    target: float = 0.5,
    n_per_probe: int = 400,
    tol: float = 0.01,
    seed: int = 0,
    lam_hi: float | None = None,
    eps: float = 1e-3,
    threads: int = 1,
    max_doublings: int = 5,
) -> ThresholdResult:
    """Bisect the intensity at which the crossing probability hits target.

    A common bank of configurations sampled at the top intensity is reused
    via hash-thinning at every probe, so the empirical crossing function is
    monotone per seed and the bracket always retains its sign change.
    """
    if phase not in ("occupied", "vacant"):
        raise ValueError(f"bad phase {phase!r}")
    if not (0.0 <= target <= 1.0):
        raise ValueError("target must be in [0, 1]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if target == 0.0:
        return ThresholdResult(0.0, phase, ell, aspect, target, tol, n_per_probe, seed)
    event = CrossingEvent(ell, aspect, phase)
    window = event.base_window()
    lam_top = lam_hi if lam_hi is not None else _default_lambda_hi(law)

    bank: list[Configuration] = []

    def ensure_bank(m: int) -> None:
        while len(bank) < m:
            i = len(bank)
            bank.append(
                sample_configuration(law, lam_top, window, derive_seed(seed, i), eps=eps)
            )

    def gap(lam: float, m: int) -> tuple[float, Estimate]:
        ensure_bank(m)

        def one(i: int) -> bool:
            return event.evaluate(thin(bank[i], lam))

        k = _run_indicator(one, m, threads)
        est = Estimate.from_counts(k, m, seed)
        g = est.p_hat - target if phase == "occupied" else target - est.p_hat
        return g, est

    for attempt in range(max_doublings + 1):
        g_top, est_top = gap(lam_top, n_per_probe)
        if g_top >= 0.0:
            break
        if attempt == max_doublings:
            raise ThresholdError(
                f"crossing probability never reaches target: p_hat={est_top.p_hat} "
                f"at lambda={lam_top} ({phase}, ell={ell})"
            )
        lam_top *= 2.0
        bank.clear()  # the bank intensity changed; resample

    lo, hi = 0.0, lam_top
    trace = []
    last_est = est_top
    prev = []  # (lam, p_hat, m) for the per-seed monotonicity assertion
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        bracket = hi - lo
        m = n_per_probe
        if bracket <= 2.0 * tol:
            m = 4 * n_per_probe
        elif bracket <= 4.0 * tol:
            m = 2 * n_per_probe
        g_mid, est = gap(mid, m)
        for lam_p, p_p, m_p in prev:
            if m_p == m:
                occ_p = p_p if phase == "occupied" else 1.0 - p_p
                occ_c = est.p_hat if phase == "occupied" else 1.0 - est.p_hat
                if (lam_p < mid and occ_p > occ_c) or (lam_p > mid and occ_p < occ_c):
                    raise AssertionError("per-seed monotone coupling violated")
        prev.append((mid, est.p_hat, m))
        trace.append((lo, hi, mid, est.p_hat, m))
        last_est = est
        if g_mid >= 0.0:
            hi = mid
        else:
            lo = mid
    return ThresholdResult(
        lambda_hat=0.5 * (lo + hi),
        phase=phase,
        ell=ell,
        aspect=aspect,
        target=target,
        tol=tol,
        n_per_probe=n_per_probe,
        seed=seed,
        iterations=tuple(trace),
        ci_width_at_root=last_est.ci_high - last_est.ci_low,
    )


# ---------------------------------------------------------------------------
# decay profile


@dataclass(frozen=True)
class DecayPoint:
    L: float
    k: int
    estimate: Estimate


@dataclass(frozen=True)
class DecayProfile:
    ell: float
    cap: float | None
    lam: float
    points: tuple[DecayPoint, ...]
    slope: float | None
    intercept: float | None

    @property
    def censored(self) -> bool:
        return self.slope is None


def decay_profile(
    law: AnyLaw,
    lam: float,
    ell: float,
    L_list: Sequence[float],
    cap: float | None,
    n: int,
    seed: int,
    eps: float = 1e-3,
    threads: int = 1,
) -> DecayProfile:
    """Estimate capped-arm probabilities over increasing L and fit the decay.

    All L values are evaluated on the same configurations (one graph build
    per replicate), so the profile is monotone per sample.  Slope is OLS of
    ``log p_hat`` against ``L / ell`` over the points with positive counts.
    """
    L_list = sorted(L_list)
    if not L_list or L_list[0] < ell:
        raise ValueError("L_list must be nonempty with min(L_list) >= ell")
    window = Rect.square(0.0, 0.0, L_list[-1])

    def one(i: int) -> np.ndarray:
        config = sample_configuration(law, lam, window, derive_seed(seed, i), eps=eps)
        sub = truncate(config, cap) if cap is not None else config
        graph = build_graph(sub)
        return np.array(
            [
                arm_event(config, (0.0, 0.0), ell, L, radius_cap=cap, graph=graph)
                for L in L_list
            ],
            dtype=np.int64,
        )

    if threads <= 1:
        counts = sum((one(i) for i in range(n)), np.zeros(len(L_list), dtype=np.int64))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = sum(pool.map(one, range(n)), np.zeros(len(L_list), dtype=np.int64))

    points = tuple(
        DecayPoint(L, int(k), Estimate.from_counts(int(k), n, seed))
        for L, k in zip(L_list, counts)
    )
    xs = [L / ell for L, k in zip(L_list, counts) if k > 0]
    ys = [math.log(k / n) for k in counts if k > 0]
    if len(xs) >= 2:
        slope, intercept = np.polyfit(xs, ys, 1)
        slope, intercept = float(slope), float(intercept)
    else:
        slope = intercept = None
    return DecayProfile(ell, cap, lam, points, slope, intercept)


# ---------------------------------------------------------------------------
# union-bound breakdown over necklace scales


@dataclass(frozen=True)
class BlockingBound:
    """Three-term bound on the probability that the ball is encircled."""

    L: float
    c_fit: float
    small_term: float  # exp(-c sqrt(L)) / c
    tail_term: float  # (lam / c) * sum of circuit weights over scales
    total: float
    analytic_cap: float  # (lam / c) * 99 pi * second-moment tail
    j0: int


def blocking_bound(law: RadiusLaw, lam: float, L: float, c_fit: float) -> BlockingBound:
    """Evaluate the Peierls-style bound at scale L with a fitted rate c."""
    if not c_fit > 0:
        raise ValueError("c_fit must be positive")
    ts = circuit_weight_tail(law, L)
    small = math.exp(-c_fit * math.sqrt(L)) / c_fit
    tail = lam / c_fit * ts.total
    cap = lam / c_fit * ts.bound
    return BlockingBound(L, c_fit, small, tail, small + tail, cap, ts.j0)


def blocking_profile(
    law: RadiusLaw, lam: float, L_grid: Sequence[float], c_fit: float
) -> list[BlockingBound]:
    return [blocking_bound(law, lam, L, c_fit) for L in L_grid]


# ---------------------------------------------------------------------------
# dependence of the coarse-grained field


@dataclass(frozen=True)
class CorrelationPoint:
    distance: int
    corr: float | None
    ci_low: float | None
    ci_high: float | None


@dataclass(frozen=True)
class DependenceResult:
    ell: float
    lam: float
    n: int
    p_x1: Estimate
    cross_p: Estimate
    correlations: tuple[CorrelationPoint, ...]

    @property
    def union_bound_ok(self) -> bool:
        """p_hat[X=1] <= 4 p_hat[cross] + 3 sigma_joint."""
        slack = 3.0 * math.sqrt(self.p_x1.std_err**2 + 16.0 * self.cross_p.std_err**2)
        return self.p_x1.p_hat <= 4.0 * self.cross_p.p_hat + slack


def _pearson_ci(a: np.ndarray, b: np.ndarray) -> CorrelationPoint | None:
    if a.std() == 0.0 or b.std() == 0.0:
        return None
    r = float(np.corrcoef(a, b)[0, 1])
    n = len(a)
    if n <= 3:
        return CorrelationPoint(0, r, -1.0, 1.0)
    z = math.atanh(max(min(r, 1 - 1e-12), -1 + 1e-12))
    half = 1.959963984540054 / math.sqrt(n - 3)
    return CorrelationPoint(0, r, math.tanh(z - half), math.tanh(z + half))


def dependence_test(
    law: AnyLaw,
    lam: float,
    ell: float,
    d_list: Sequence[int],
    n: int,
    seed: int,
    eps: float = 1e-3,
    threads: int = 1,
) -> DependenceResult:
    """Empirical correlations of the coarse field at given lattice distances.

    X is evaluated along a row of lattice sites; correlations pair the site
    at 0 with the site at each distance.  Also reports p_hat[X=1] and the
    crossing probability entering the union bound.
    """
    d_list = sorted(set(int(d) for d in d_list))
    if not d_list or d_list[0] < 1:
        raise ValueError("d_list must contain positive integers")
    dmax = d_list[-1]
    window = Rect(-5.0 * ell, -5.0 * ell, (dmax + 5.0) * ell, 5.0 * ell)

    def one(i: int) -> np.ndarray:
        config = sample_configuration(law, lam, window, derive_seed(seed, i), eps=eps)
        return renorm_field(config, ell, (0, 0, dmax, 0))[0]

    if threads <= 1:
        rows = [one(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, range(n)))
    X = np.array(rows)
    correlations = []
    for d in d_list:
        pt = _pearson_ci(X[:, 0].astype(float), X[:, d].astype(float))
        if pt is None:
            correlations.append(CorrelationPoint(d, None, None, None))
        else:
            correlations.append(
                CorrelationPoint(d, pt.corr, pt.ci_low, pt.ci_high)
            )
    p_x1 = Estimate.from_counts(int(X[:, 0].sum()), n, seed)
    cross = mc_estimate(
        law, lam, CrossingEvent(ell, 3.0, "occupied"), n, derive_seed(seed, 1 << 20),
        eps=eps, threads=threads,
    ).estimate
    return DependenceResult(ell, lam, n, p_x1, cross, tuple(correlations))


# ---------------------------------------------------------------------------
# Poisson goodness of fit for the big-disc count


@dataclass(frozen=True)
class GofResult:
    nu: float
    n: int
    counts: tuple[int, ...]
    method: str  # "chi-square" or "binomial"
    statistic: float | None
    p_value: float
    pair_freq: Estimate  # empirical P[count >= 2]
    pair_bound: float  # nu**2

    @property
    def pair_bound_ok(self) -> bool:
        return self.pair_freq.p_hat <= self.pair_bound + 3.0 * self.pair_freq.std_err


def poisson_gof(
    law: AnyLaw,
    lam: float,
    r: float,
    s: float,
    n: int,
    seed: int,
    eps: float = 1e-3,
    threads: int = 1,
) -> GofResult:
    """Chi-square test of the big-disc count against its Poisson rate.

    Tail bins are merged until every expected count is at least 5; when
    fewer than two usable bins remain, falls back to an exact binomial
    test on the {0, >=1} split.
    """
    if n < 10:
        raise ValueError("n too small for a goodness-of-fit test")
    if isinstance(law, _laws.SlicedLaw):
        raise TypeError("goodness of fit requires a closed-form radius law")
    nu = big_disc_rate(law, lam, r, s)
    window = Rect.square(0.0, 0.0, s)

    def one(i: int) -> int:
        config = sample_configuration(law, lam, window, derive_seed(seed, i), eps=eps)
        return big_disc_count(config, r, s)

    if threads <= 1:
        samples = [one(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(one, range(n)))
    samples = np.asarray(samples, dtype=np.int64)
    kmax = int(samples.max(initial=0))
    pair_freq = Estimate.from_counts(int((samples >= 2).sum()), n, seed)

    # bins 0..m-1 plus a merged tail, with expected >= 5 everywhere
    pmf = [math.exp(-nu) * nu**k / math.factorial(k) for k in range(kmax + 1)]
    m = 0
    while m <= kmax and n * pmf[m] >= 5.0:
        m += 1
    tail_expected = n * (1.0 - sum(pmf[:m]))
    if m < 1 or (tail_expected < 5.0 and m < 2):
        p0 = math.exp(-nu)
        k_pos = int((samples >= 1).sum())
        p_value = sstats.binomtest(k_pos, n, 1.0 - p0).pvalue
        return GofResult(nu, n, tuple(np.bincount(samples)), "binomial", None,
                         float(p_value), pair_freq, nu * nu)
    observed = [int((samples == k).sum()) for k in range(m)]
    expected = [n * pmf[k] for k in range(m)]
    if tail_expected >= 5.0:
        observed.append(int((samples >= m).sum()))
        expected.append(tail_expected)
    else:
        # fold the thin tail into the last bin
        observed[-1] += int((samples >= m).sum())
        expected[-1] += tail_expected
    chi2 = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
    dof = len(observed) - 1
    p_value = float(sstats.chi2.sf(chi2, dof))
    return GofResult(nu, n, tuple(np.bincount(samples)), "chi-square", float(chi2),
                     p_value, pair_freq, nu * nu)


# ---------------------------------------------------------------------------
# necklace band probabilities against the closed-form weight profile


@dataclass(frozen=True)
class BandPoint:
    j: int
    r: float
    estimate: Estimate
    weight: float  # circuit_weight(3**j)
    ratio: float | None  # p_hat / (lam * weight)


@dataclass(frozen=True)
class BandProfile:
    L: float
    lam: float
    points: tuple[BandPoint, ...]
    c_hat: float | None  # max ratio over usable points


def necklace_band_profile(
    law: RadiusLaw,
    lam: float,
    L: float,
    j_list: Sequence[int],
    n: int,
    seed: int,
    window_half: float = 32.0,
    eps: float = 1e-3,
    threads: int = 1,
) -> BandProfile:
    """Estimate P[some necklace has second radius in [3^j, 3^(j+1)]] per j.

    Both greedy extractions run once per replicate and their second radii
    are tested against every band.
    """
    j_list = sorted(set(int(j) for j in j_list))
    window = Rect.square(0.0, 0.0, window_half)

    def one(i: int) -> np.ndarray:
        config = sample_configuration(law, lam, window, derive_seed(seed, i), eps=eps)
        radii = []
        for order in ("largest_first", "smallest_first"):
            try:
                neck = extract_necklace(config, L, order=order)
            except WindowInsufficientError:
                neck = None
            if neck is not None and not neck.degenerate:
                radii.append(second_radius(neck))
        return np.array(
            [any(3.0**j <= b2 <= 3.0 ** (j + 1) for b2 in radii) for j in j_list],
            dtype=np.int64,
        )

    if threads <= 1:
        counts = sum((one(i) for i in range(n)), np.zeros(len(j_list), dtype=np.int64))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = sum(pool.map(one, range(n)), np.zeros(len(j_list), dtype=np.int64))

    points = []
    ratios = []
    for j, k in zip(j_list, counts):
        est = Estimate.from_counts(int(k), n, seed)
        w = circuit_weight(law, 3.0**j)
        ratio = est.p_hat / (lam * w) if (lam > 0 and w > 0) else None
        if ratio is not None and k > 0:
            ratios.append(ratio)
        points.append(BandPoint(j, 3.0**j, est, w, ratio))
    c_hat = max(ratios) if ratios else None
    return BandProfile(L, lam, tuple(points), c_hat)
