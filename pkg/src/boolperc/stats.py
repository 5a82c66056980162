"""Probability estimates with Wilson score confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass

Z95 = 1.959963984540054  # two-sided 95% normal quantile


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes out of ``n`` trials."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    # clamp: at k=0 (or k=n) roundoff can push the bound past p itself
    return min(max(center - half, 0.0), p), max(min(center + half, 1.0), p)


@dataclass(frozen=True)
class Estimate:
    """Monte Carlo probability estimate with a 95% Wilson interval."""

    p_hat: float
    n: int
    ci_low: float
    ci_high: float
    seed: int

    def __post_init__(self):
        if not (0.0 <= self.ci_low <= self.p_hat <= self.ci_high <= 1.0):
            raise ValueError("inconsistent estimate bounds")

    @staticmethod
    def from_counts(k: int, n: int, seed: int) -> "Estimate":
        lo, hi = wilson_interval(k, n)
        return Estimate(k / n, n, lo, hi, seed)

    @property
    def std_err(self) -> float:
        return math.sqrt(max(self.p_hat * (1.0 - self.p_hat), 0.0) / self.n)
