"""Small statistics helpers shared by the experiment modules."""

from __future__ import annotations

import math


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def proportion_sigma(successes: int, trials: int) -> float:
    """Std. error of a proportion with an Agresti-Coull style floor.

    The +2/+4 adjustment keeps the estimate away from zero when the
    empirical count sits at 0 or n, so 3-sigma guards stay meaningful.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = (successes + 2) / (trials + 4)
    return math.sqrt(p * (1 - p) / trials)


def statistical_distance(p: dict, q: dict) -> float:
    """Total variation distance between two distributions given as dicts."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0) - q.get(k, 0)) for k in keys)
