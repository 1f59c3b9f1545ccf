"""Rician channel construction for uniform linear arrays.

A link between an ``N``-antenna transmitter and an ``M``-antenna receiver is
modelled as::

    G = sqrt(beta) * (sqrt(kbar) * r t^T + sqrt(ktilde) * S_r Htilde S_t)

where ``r``/``t`` are the receive/transmit steering vectors, ``Htilde`` has
i.i.d. CN(0, 1) entries and ``S_r``/``S_t`` are optional correlation square
roots (identity for the uncorrelated model).
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy.linalg import toeplitz

from .errors import InvalidArgumentError

__all__ = [
    "RicianLink", "ChannelRealization", "CorrelationConfig", "CellGeometry",
    "UserDrop", "steering_vector", "los_matrix", "sample_scattered",
    "rician_channel", "exponential_correlation", "correlation_sqrt",
    "scattered_variance", "draw_user_drop", "fixed_angles",
]

# Minimum separation between user angles before a redraw is forced (rad).
ANGLE_COLLISION_TOL = 1e-6
# Eigenvalues below this (negative) value mean the matrix is not PSD.
NEGATIVE_EIG_TOL = -1e-8


def steering_vector(count, spacing, angle):
    """Array response of a uniform linear array.

    Entry ``m`` equals ``exp(j 2 pi m spacing sin(angle))``.

    Parameters
    ----------
    count : int
        Number of antennas (>= 1).
    spacing : float
        Element spacing in wavelengths.
    angle : float
        Angle of arrival/departure in radians.

    Returns
    -------
    ndarray of complex, shape (count,)
    """
    if int(count) != count or count < 1:
        raise InvalidArgumentError(f"antenna count must be a positive integer, got {count!r}")
    if spacing <= 0:
        raise InvalidArgumentError(f"antenna spacing must be positive, got {spacing!r}")
    phase = 2.0 * np.pi * spacing * math.sin(angle) * np.arange(int(count))
    return np.exp(1j * phase)


def los_matrix(r, t):
    """Rank-one specular matrix ``r t^T`` (plain transpose, no conjugation)."""
    return np.outer(np.asarray(r), np.asarray(t))


def sample_scattered(M, N, rng, batch=None):
    """Draw i.i.d. CN(0, 1) entries.

    Real and imaginary parts are drawn as one contiguous block of
    ``2*M*N`` (times ``batch``) standard normals, so the number of values
    consumed from ``rng`` depends only on the shape.
    """
    shape = (M, N) if batch is None else (batch, M, N)
    x = rng.standard_normal(shape + (2,))
    return (x[..., 0] + 1j * x[..., 1]) * np.sqrt(0.5)


@dataclass(frozen=True)
class RicianLink:
    """Parameters of one transmitter/receiver link.

    ``M`` receive antennas with spacing ``d_r`` see the specular component at
    ``theta``; ``N`` transmit antennas with spacing ``d_t`` emit it at
    ``phi``. ``beta`` is the linear large-scale gain and ``kappa`` the
    linear Rician factor.
    """

    M: int
    N: int
    beta: float
    kappa: float
    theta: float = 0.0
    phi: float = 0.0
    d_r: float = 0.3
    d_t: float = 0.3

    def __post_init__(self):
        if self.M < 1 or self.N < 1:
            raise InvalidArgumentError(f"antenna counts must be >= 1, got M={self.M}, N={self.N}")
        if not self.kappa > 0:
            raise InvalidArgumentError(f"Rician factor must be > 0, got {self.kappa}")
        if not self.beta > 0:
            raise InvalidArgumentError(f"large-scale gain must be > 0, got {self.beta}")

    @property
    def ktilde(self):
        """Scattered power fraction ``1 / (1 + kappa)``."""
        return 1.0 / (1.0 + self.kappa)

    @property
    def kbar(self):
        """Specular power fraction ``kappa / (1 + kappa)``."""
        # written as a complement so kbar + ktilde == 1 holds exactly
        return 1.0 - self.ktilde

    def rx_steering(self):
        return steering_vector(self.M, self.d_r, self.theta)

    def tx_steering(self):
        return steering_vector(self.N, self.d_t, self.phi)

    def los(self):
        """Specular part ``sqrt(beta kbar) r t^T`` of the channel."""
        return math.sqrt(self.beta * self.kbar) * los_matrix(self.rx_steering(), self.tx_steering())


@dataclass(frozen=True)
class ChannelRealization:
    """A sampled channel split into its specular and scattered parts.

    ``scattered`` may carry a leading batch axis; ``los`` never does.
    """

    los: np.ndarray
    scattered: np.ndarray

    @property
    def total(self):
        return self.los + self.scattered


def exponential_correlation(size, g):
    """Exponential correlation matrix with entries ``g**|i - j|``."""
    if not 0.0 <= g <= 1.0:
        raise InvalidArgumentError(f"correlation coefficient must lie in [0, 1], got {g}")
    return toeplitz(float(g) ** np.arange(size))


def correlation_sqrt(sigma):
    """Hermitian PSD square root via eigendecomposition.

    Eigenvalues in ``[-1e-8, 0)`` are clamped to zero; anything more
    negative raises :class:`InvalidArgumentError`.
    """
    sigma = np.asarray(sigma)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise InvalidArgumentError(f"correlation matrix must be square, got shape {sigma.shape}")
    if np.array_equal(sigma, np.eye(sigma.shape[0])):
        return np.eye(sigma.shape[0])
    if not np.allclose(sigma, sigma.conj().T, rtol=0, atol=1e-12):
        raise InvalidArgumentError("correlation matrix must be Hermitian")
    w, v = np.linalg.eigh(sigma)
    if w.min() < NEGATIVE_EIG_TOL:
        raise InvalidArgumentError(
            f"correlation matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


@lru_cache(maxsize=128)
def _exp_corr_sqrt(size, g):
    out = correlation_sqrt(exponential_correlation(size, g))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CorrelationConfig:
    """Exponential correlation coefficients at the BS (``g_b``) and user (``g_u``) arrays."""

    g_b: float = 0.0
    g_u: float = 0.0

    def __post_init__(self):
        for name in ("g_b", "g_u"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value}")

    def bs_sqrt(self, M):
        return _exp_corr_sqrt(int(M), float(self.g_b))

    def user_sqrt(self, N):
        return _exp_corr_sqrt(int(N), float(self.g_u))

    @property
    def trivial(self):
        return self.g_b == 0.0 and self.g_u == 0.0


def rician_channel(link, corr=None, rng=None, batch=None):
    """Sample one (or ``batch``) channel realizations of ``link``.

    Parameters
    ----------
    link : RicianLink
    corr : CorrelationConfig, optional
        When given, the scattered part becomes ``S_b Htilde S_u``. A zero
        coefficient leaves that side untouched, so ``g_b = g_u = 0``
        reproduces the uncorrelated draw bit for bit.
    rng : numpy.random.Generator
    batch : int, optional
        Leading batch size of the scattered matrix.

    Returns
    -------
    ChannelRealization
    """
    if rng is None:
        raise InvalidArgumentError("a seeded numpy Generator is required")
    h = sample_scattered(link.M, link.N, rng, batch)
    if corr is not None:
        if corr.g_b != 0.0:
            h = corr.bs_sqrt(link.M) @ h
        if corr.g_u != 0.0:
            h = h @ corr.user_sqrt(link.N)
    return ChannelRealization(los=link.los(), scattered=math.sqrt(link.beta * link.ktilde) * h)


def scattered_variance(r_i, t_k, bs_sqrt=None, user_sqrt=None):
    """Variance of the correlated scattered term seen through ``r_i`` and ``t_k``.

    Returns ``||r_i^H S_b||^2 ||t_k^H S_u||^2 / (M N)``; equals one without
    correlation. Exact for real symmetric square roots such as the
    exponential model.
    """
    r_i = np.asarray(r_i)
    t_k = np.asarray(t_k)
    a = r_i.conj() if bs_sqrt is None else r_i.conj() @ bs_sqrt
    b = t_k.conj() if user_sqrt is None else t_k.conj() @ user_sqrt
    return float(np.vdot(a, a).real * np.vdot(b, b).real / (r_i.size * t_k.size))


@dataclass(frozen=True)
class CellGeometry:
    """Cell layout and large-scale fading law ``beta = z / (r / r_h)**v``.

    ``placement`` selects how user distances are drawn: ``"radius"`` draws
    ``r`` uniformly on ``[r_h, r_m]``, ``"area"`` uniformly over the annulus.
    Shadowing is ``z = 10**(x / 10)`` with ``x ~ Normal(0, sigma_db**2)``.
    """

    r_h: float = 100.0
    r_m: float = 1000.0
    v: float = 3.8
    sigma_db: float = 8.0
    placement: str = "radius"

    def __post_init__(self):
        if not 0 < self.r_h < self.r_m:
            raise InvalidArgumentError(f"need 0 < r_h < r_m, got {self.r_h}, {self.r_m}")
        if self.placement not in ("radius", "area"):
            raise InvalidArgumentError(f"unknown placement {self.placement!r}")
        if self.sigma_db < 0:
            raise InvalidArgumentError("shadowing deviation must be non-negative")

    def mean_gain(self):
        """Closed-form ``E[beta]`` for this geometry."""
        s = self.sigma_db * math.log(10.0) / 10.0
        mean_z = math.exp(0.5 * s * s)
        q = self.r_h / self.r_m
        if self.placement == "radius":
            mean_path = self.r_h * (1.0 - q ** (self.v - 1.0)) / ((self.r_m - self.r_h) * (self.v - 1.0))
        else:
            mean_path = (2.0 * self.r_h ** 2 * (1.0 - q ** (self.v - 2.0))
                         / ((self.v - 2.0) * (self.r_m ** 2 - self.r_h ** 2)))
        return mean_z * mean_path


@dataclass(frozen=True)
class UserDrop:
    """Per-user large-scale parameters of one random cell drop."""

    beta: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    r: np.ndarray = field(default=None)
    z: np.ndarray = field(default=None)

    @property
    def K(self):
        return len(self.theta)


def fixed_angles(K):
    """Deterministic angles ``pi/2 + (2k - 1) / (2K)`` for ``k = 1..K``."""
    k = np.arange(1, K + 1)
    return np.pi / 2 + (2 * k - 1) / (2.0 * K)


def _distinct_angles(K, rng):
    theta = rng.uniform(-np.pi / 2, np.pi / 2, K)
    while K > 1:
        order = np.argsort(theta)
        close = np.flatnonzero(np.diff(theta[order]) < ANGLE_COLLISION_TOL)
        if close.size == 0:
            break
        redraw = order[close + 1]
        theta[redraw] = rng.uniform(-np.pi / 2, np.pi / 2, redraw.size)
    return theta


def draw_user_drop(K, geometry=None, rng=None, angles="random"):
    """Drop ``K`` users in the cell.

    Draw order from ``rng`` is fixed: distances, shadowing, arrival angles
    (with collision redraws), departure angles.

    Parameters
    ----------
    K : int
    geometry : CellGeometry, optional
    rng : numpy.random.Generator
    angles : {"random", "fixed"}
        ``"fixed"`` uses :func:`fixed_angles` for ``theta`` and zero ``phi``.
    """
    if K < 1:
        raise InvalidArgumentError(f"need at least one user, got K={K}")
    if rng is None:
        raise InvalidArgumentError("a seeded numpy Generator is required")
    geometry = geometry or CellGeometry()
    if geometry.placement == "radius":
        r = rng.uniform(geometry.r_h, geometry.r_m, K)
    else:
        r = np.sqrt(rng.uniform(geometry.r_h ** 2, geometry.r_m ** 2, K))
    z = 10.0 ** (geometry.sigma_db * rng.standard_normal(K) / 10.0)
    beta = z / (r / geometry.r_h) ** geometry.v
    if angles == "random":
        theta = _distinct_angles(K, rng)
        phi = rng.uniform(-np.pi / 2, np.pi / 2, K)
    elif angles == "fixed":
        theta = fixed_angles(K)
        phi = np.zeros(K)
    else:
        raise InvalidArgumentError(f"unknown angle mode {angles!r}")
    return UserDrop(beta=beta, theta=theta, phi=phi, r=r, z=z)
