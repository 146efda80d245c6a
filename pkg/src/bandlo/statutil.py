"""Shared statistical helpers: Wilson intervals and the rule of three."""

from __future__ import annotations

import math

__all__ = ["Z_99", "Z_95", "wilson_interval", "rule_of_three"]

# two-sided normal quantiles
Z_99 = 2.5758293035489004
Z_95 = 1.959963984540054


def wilson_interval(successes: int, trials: int, z: float = Z_99) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not (0 <= successes <= trials):
        raise ValueError("successes outside [0, trials]")
    phat = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (phat + z2 / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def rule_of_three(trials: int) -> float:
    """One-sided 95% upper bound on a probability unobserved in `trials` runs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return 3.0 / trials
