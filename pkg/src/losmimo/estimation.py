"""Pilot-based MMSE estimation of the scattered channel and the resulting baseline.

The specular part ``gbar`` of the effective channel is assumed known; only
``gtilde ~ CN(0, beta ktilde I)`` is estimated from ``tau`` pilot symbols.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidArgumentError
from .stats import summarize

__all__ = [
    "PilotConfig", "EstimationReport", "canonical_pilot", "pilot_observe",
    "mmse_estimate_scattered", "ff_receive_sinr", "ff_uplink_sinrs",
    "ff_rate", "error_variance", "estimate_variance",
]


@dataclass(frozen=True)
class PilotConfig:
    """Coherence interval ``T`` (symbols) of which ``tau`` carry pilots."""

    T: int = 196
    tau: int = 1

    def __post_init__(self):
        if self.T < 1:
            raise InvalidArgumentError(f"coherence interval must be >= 1, got {self.T}")
        if not 0 <= self.tau < self.T:
            raise InvalidArgumentError(f"need 0 <= tau < T, got tau={self.tau}, T={self.T}")

    @property
    def prelog(self):
        return (self.T - self.tau) / self.T

    def pilot_power(self, p_u):
        """Uplink pilot energy ``tau * p_u``."""
        return self.tau * p_u


@dataclass(frozen=True)
class EstimationReport:
    """MMSE estimate of the effective channel.

    ``estimate`` is ``gbar + scattered``; ``error_variance`` and
    ``estimate_variance`` are the per-entry variances of the estimation
    error and of ``scattered``.
    """

    estimate: np.ndarray
    scattered: np.ndarray
    error_variance: float
    estimate_variance: float


def error_variance(p_p, beta, ktilde):
    return beta * ktilde / (1.0 + p_p * beta * ktilde)


def estimate_variance(p_p, beta, ktilde):
    return beta ** 2 * ktilde ** 2 * p_p / (1.0 + p_p * beta * ktilde)


def canonical_pilot(tau, index=0):
    """Unit vector ``e_index`` of length ``tau`` (orthogonal across indices)."""
    if tau < 1:
        raise InvalidArgumentError("pilot length must be >= 1; use the LOS-only path for tau = 0")
    if not 0 <= index < tau:
        raise InvalidArgumentError(f"pilot index {index} out of range for tau={tau}")
    phi = np.zeros(tau, dtype=complex)
    phi[index] = 1.0
    return phi


def pilot_observe(g, pilot, p_p, rng):
    """Received pilot block ``sqrt(p_p) g pilot^T + Z``.

    Parameters
    ----------
    g : ndarray (..., M)
    pilot : ndarray (tau,)
        Unit-norm pilot sequence.
    p_p : float
    rng : numpy.random.Generator

    Returns
    -------
    ndarray (..., M, tau)
    """
    pilot = np.asarray(pilot)
    if pilot.size == 0:
        raise InvalidArgumentError("pilot length must be >= 1; use the LOS-only path for tau = 0")
    g = np.asarray(g)
    shape = g.shape + (pilot.size,)
    x = rng.standard_normal(shape + (2,))
    noise = (x[..., 0] + 1j * x[..., 1]) * math.sqrt(0.5)
    return math.sqrt(p_p) * g[..., :, None] * pilot + noise


def mmse_estimate_scattered(Y_p, g_los, pilot, p_p, beta, ktilde):
    """MMSE estimate of the scattered channel from a pilot block.

    ``gtilde_hat = sqrt(p_p) beta ktilde / (1 + p_p beta ktilde)
    * (Y_p - sqrt(p_p) gbar pilot^T) conj(pilot)``.
    """
    pilot = np.asarray(pilot)
    g_los = np.asarray(g_los)
    residual = np.asarray(Y_p) - math.sqrt(p_p) * g_los[:, None] * pilot
    gain = math.sqrt(p_p) * beta * ktilde / (1.0 + p_p * beta * ktilde)
    scattered = gain * (residual @ pilot.conj())
    return EstimationReport(
        estimate=g_los + scattered,
        scattered=scattered,
        error_variance=error_variance(p_p, beta, ktilde),
        estimate_variance=estimate_variance(p_p, beta, ktilde),
    )


def ff_receive_sinr(estimate, p_u, error_var):
    """``p ||ghat||^2 / (p delta_xi^2 + 1)`` along the last axis."""
    energy = np.sum(np.abs(np.asarray(estimate)) ** 2, axis=-1)
    return p_u * energy / (p_u * error_var + 1.0)


def ff_uplink_sinrs(estimates, p_u, error_vars):
    """MRC-on-estimates SINR for every user.

    Inter-user terms use the estimated columns; estimation error and noise
    enter through their expectations. Reduces to :func:`ff_receive_sinr`
    for a single user.

    Parameters
    ----------
    estimates : ndarray (..., M, K)
    p_u : float
    error_vars : sequence of float, length K
    """
    Gh = np.asarray(estimates)
    energy = np.sum(np.abs(Gh) ** 2, axis=-2)
    cross = np.abs(np.einsum("...mk,...mi->...ki", Gh.conj(), Gh)) ** 2
    off = 1.0 - np.eye(Gh.shape[-1])
    interference = np.sum(cross * off, axis=-1)
    total_err = math.fsum(error_vars)
    return p_u * energy / (p_u * interference / energy + p_u * total_err + 1.0)


def ff_rate(pilot, sinr_samples, master_seed=0):
    """``(T - tau) / T * E[log2(1 + sinr)]`` as a :class:`~losmimo.stats.RateEstimate`."""
    rates = np.log2(1.0 + np.asarray(sinr_samples, dtype=float))
    return summarize(rates, master_seed, scale=pilot.prelog)
