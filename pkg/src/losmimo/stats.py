"""Monte Carlo summary statistics."""

from dataclasses import dataclass, field
import math

import numpy as np

__all__ = ["RateEstimate", "Z95", "summarize"]

Z95 = 1.96


@dataclass(frozen=True)
class RateEstimate:
    """Sample mean of a rate with its 95% normal-approximation half-width.

    ``per_user`` holds the per-user means for multi-user scenarios; ``mean``
    is their average (the average individual rate).
    """

    mean: float
    ci_halfwidth: float
    trials: int
    master_seed: int
    per_user: tuple = field(default=())


def summarize(samples, master_seed, scale=1.0):
    """Build a :class:`RateEstimate` from per-trial rates.

    ``samples`` has shape ``(trials,)`` or ``(trials, K)``; in the latter
    case the CI is computed on the per-trial user average.
    """
    x = np.asarray(samples, dtype=float) * scale
    per_user = ()
    if x.ndim == 2:
        per_user = tuple(float(v) for v in x.mean(axis=0))
        x = x.mean(axis=1)
    n = x.size
    mean = math.fsum(x) / n
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    return RateEstimate(mean=mean, ci_halfwidth=Z95 * std / math.sqrt(n), trials=n,
                        master_seed=master_seed, per_user=per_user)
