"""Closed-form statistical SINRs, rate bounds and power-scaling limits.

All functions work in linear units. A *statistical* SINR replaces the
random scattered-interference and noise powers by their expectations while
keeping the deterministic LOS terms exact.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .errors import DegenerateAngleWarning, InvalidArgumentError

__all__ = [
    "ScalingPolicy", "SinrReport", "rician_split", "su_statistical_sinr",
    "su_rate_bounds", "rho_interference", "rho_matrix",
    "ul_mrc_statistical_sinr", "ul_mrc_sinrs", "ul_statistical_sinr",
    "ul_large_k_approx", "ul_interference_constant", "ul_limits",
    "dl_statistical_sinr", "dl_sinrs", "dl_interference_constant",
    "dl_limits", "ff_limit_rate", "favorable_propagation_gap",
]

SCALING_MODES = ("fixed-power", "fixed-energy", "downlink-energy")
# |1 - exp(j phi)| below this is treated as an exact angle collision.
DEGENERATE_TOL = 1e-12


def rician_split(kappa):
    """Return ``(kbar, ktilde)`` with ``kbar + ktilde == 1``."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise InvalidArgumentError("Rician factor must be > 0")
    ktilde = 1.0 / (1.0 + kappa)
    kbar = 1.0 - ktilde
    if kbar.ndim == 0:
        return float(kbar), float(ktilde)
    return kbar, ktilde


@dataclass(frozen=True)
class ScalingPolicy:
    """How the transmit power follows the array sizes.

    ``fixed-power``: ``p = value``. ``fixed-energy``: ``E_u = M N p_u``
    is held at ``value``. ``downlink-energy``: ``E_b = M N p_b / K`` is held
    at ``value``.
    """

    mode: str
    value: float

    def __post_init__(self):
        if self.mode not in SCALING_MODES:
            raise InvalidArgumentError(f"unknown scaling mode {self.mode!r}; expected one of {SCALING_MODES}")
        if not self.value > 0:
            raise InvalidArgumentError(f"scaling value must be positive, got {self.value}")

    def power(self, M, N, K=1):
        """Per-transmitter power for the given dimensions."""
        if self.mode == "fixed-power":
            return self.value
        if self.mode == "fixed-energy":
            return self.value / (M * N)
        return self.value * K / (M * N)

    def energy(self, M, N, K=1):
        """``M N p`` (uplink) or ``M N p / K`` (downlink) at the resolved power."""
        p = self.power(M, N, K)
        return M * N * p / K if self.mode == "downlink-energy" else M * N * p


@dataclass(frozen=True)
class SinrReport:
    """Statistical SINR and the rate bounds it implies (bits/s/Hz)."""

    statistical_sinr: float
    rate_lower: float
    rate_upper: float
    limit_rate: float


def su_statistical_sinr(p_u, beta, kappa, M, N):
    """Single-user statistical SINR ``N M p beta kbar / (1 + p beta ktilde)``."""
    kbar, ktilde = rician_split(kappa)
    return N * M * p_u * beta * kbar / (1.0 + p_u * beta * ktilde)


def su_rate_bounds(beta, kappa, M, N, p_u=None, scaling=None):
    """Lower/upper bounds on the single-user ergodic rate.

    Exactly one of ``p_u`` and ``scaling`` must be given. The upper bound is
    ``log2(1 + p_u beta kbar M N)``; ``limit_rate`` is its value written as
    ``log2(1 + E_u beta kbar)`` with ``E_u = M N p_u``, which is the
    large-array limit when ``E_u`` is held fixed.
    """
    if (p_u is None) == (scaling is None):
        raise InvalidArgumentError("give exactly one of p_u and scaling")
    if p_u is None:
        p_u = scaling.power(M, N)
    kbar, _ = rician_split(kappa)
    sinr = su_statistical_sinr(p_u, beta, kappa, M, N)
    energy = M * N * p_u
    upper = math.log2(1.0 + p_u * beta * kbar * M * N)
    return SinrReport(
        statistical_sinr=sinr,
        rate_lower=math.log2(1.0 + sinr),
        rate_upper=upper,
        limit_rate=math.log2(1.0 + energy * beta * kbar),
    )


def _dirichlet(phi, M):
    den = -np.expm1(1j * phi)
    degenerate = np.abs(den) < DEGENERATE_TOL
    safe = np.where(degenerate, 1.0, den)
    value = np.where(degenerate, complex(M), -np.expm1(1j * M * phi) / safe)
    return value, degenerate


def rho_interference(theta_i, theta_k, d, M):
    """Inner product ``r_k^H r_i`` of two BS steering vectors in closed form.

    ``(1 - exp(j M phi)) / (1 - exp(j phi))`` with
    ``phi = 2 pi d (sin theta_i - sin theta_k)``. At a collision the
    continuous limit ``M`` is returned and a :class:`DegenerateAngleWarning`
    is issued.
    """
    phi = 2.0 * np.pi * d * (math.sin(theta_i) - math.sin(theta_k))
    value, degenerate = _dirichlet(phi, M)
    if degenerate:
        warnings.warn(f"angles {theta_i!r} and {theta_k!r} coincide; using the limit M={M}",
                      DegenerateAngleWarning, stacklevel=2)
    return complex(value)


def rho_matrix(thetas, d, M):
    """Matrix of ``rho[k, i] = r_k^H r_i``; the diagonal is ``M``."""
    s = np.sin(np.asarray(thetas, dtype=float))
    phi = 2.0 * np.pi * d * (s[None, :] - s[:, None])
    value, degenerate = _dirichlet(phi, M)
    np.fill_diagonal(degenerate, False)
    if degenerate.any():
        pairs = [tuple(map(int, p)) for p in np.argwhere(np.triu(degenerate))]
        warnings.warn(f"users {pairs} have coinciding angles; using the limit M={M}",
                      DegenerateAngleWarning, stacklevel=2)
    return value


def _unpack(users):
    arr = np.asarray(users, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise InvalidArgumentError("users must be a sequence of (beta, kappa, theta) triples")
    beta, kappa, theta = arr.T
    kbar, ktilde = rician_split(kappa)
    return beta, np.atleast_1d(kbar), np.atleast_1d(ktilde), theta


def ul_mrc_sinrs(users, p_u, M, N, d):
    """Uplink MRC statistical SINR of every user.

    Parameters
    ----------
    users : sequence of (beta, kappa, theta)
    p_u : float
    M, N : int
    d : float
        BS antenna spacing in wavelengths.

    Returns
    -------
    ndarray, shape (K,)
    """
    beta, kbar, ktilde, theta = _unpack(users)
    rho2 = np.abs(rho_matrix(theta, d, M)) ** 2
    np.fill_diagonal(rho2, 0.0)
    los_power = beta * kbar
    interference = (p_u * N / M) * (rho2 @ los_power)
    scattered = p_u * np.sum(ktilde * beta)
    return p_u * M * N * los_power / (1.0 + interference + scattered)


def ul_mrc_statistical_sinr(k, users, p_u, M, N, d):
    """Uplink MRC statistical SINR of user ``k``."""
    if not 0 <= k < len(users):
        raise InvalidArgumentError(f"user index {k} out of range for K={len(users)}")
    return float(ul_mrc_sinrs(users, p_u, M, N, d)[k])


def ul_statistical_sinr(detector, los_channel, scattered_power, p_u, bs_sqrt=None, user_gain=None):
    """Statistical SINR of any linear detector, from its definition.

    ``p |l_k^H gbar_k|^2 / (p sum_i E|l_k^H gtilde_i|^2
    + p sum_{i != k} |l_k^H gbar_i|^2 + ||l_k||^2)``.

    Parameters
    ----------
    detector : ndarray (M, K)
        Columns ``lambda_k``.
    los_channel : ndarray (M, K)
        Columns ``gbar_k``.
    scattered_power : sequence of float
        ``beta_i ktilde_i``.
    p_u : float
    bs_sqrt : ndarray (M, M), optional
        BS correlation square root.
    user_gain : sequence of float, optional
        ``||S_i b_i||^2`` for correlated user arrays (defaults to 1).
    """
    L = np.asarray(detector)
    G = np.asarray(los_channel)
    s = np.asarray(scattered_power, dtype=float)
    q = np.ones_like(s) if user_gain is None else np.asarray(user_gain, dtype=float)
    cross = np.abs(L.conj().T @ G) ** 2
    norms = np.sum(np.abs(L) ** 2, axis=0)
    shaped = norms if bs_sqrt is None else np.sum(np.abs(np.asarray(bs_sqrt).conj().T @ L) ** 2, axis=0)
    signal = np.diag(cross).copy()
    interference = np.sum(cross * (1.0 - np.eye(cross.shape[0])), axis=1)
    den = p_u * shaped * np.sum(s * q) + p_u * interference + norms
    return p_u * signal / den


def ul_large_k_approx(beta_k, kappa_k, mean_beta, mean_kbar, mean_ktilde, mean_rho2, K, p_u, M, N):
    """Uplink MRC SINR with the interference sums replaced by ensemble means."""
    if K < 1:
        raise InvalidArgumentError(f"K must be >= 1, got {K}")
    kbar_k, _ = rician_split(kappa_k)
    den = (1.0 + (p_u * N / M) * (K - 1) * mean_beta * mean_kbar * mean_rho2
           + p_u * K * mean_ktilde * mean_beta)
    return p_u * M * N * beta_k * kbar_k / den


def ul_interference_constant(k, users, M, d):
    """``c(K) = sum_{i != k} beta_i kbar_i |rho_ki|^2``."""
    beta, kbar, _, theta = _unpack(users)
    rho2 = np.abs(rho_matrix(theta, d, M)[k]) ** 2
    rho2[k] = 0.0
    return float(np.sum(beta * kbar * rho2))


def _check_alpha(alpha, iota):
    if alpha is None or not 0.0 < alpha <= 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1], got {alpha}")
    if iota is None or not iota > 0:
        raise InvalidArgumentError(f"iota must be positive, got {iota}")


def ul_limits(kind, E_u, beta_k, kappa_k, *, M=None, c=None, alpha=None, iota=None,
              N=None, mean_beta=None, mean_ktilde=None):
    """Asymptotic uplink MRC SINR under fixed ``E_u = M N p_u``.

    ``"large-M"``: the BS array grows with finitely many users.
    ``"large-N"``: user arrays grow with ``M`` and ``K > 1`` fixed; needs
    ``M`` and the interference constant ``c``.
    ``"users-scale"``: ``K / M**alpha -> iota``; for ``alpha == 1`` also
    needs ``N``, ``mean_beta`` and ``mean_ktilde``.
    """
    kbar_k, _ = rician_split(kappa_k)
    base = E_u * beta_k * kbar_k
    if kind == "large-M":
        return base
    if kind == "large-N":
        if M is None or c is None:
            raise InvalidArgumentError("large-N limit needs M and c")
        return base / (1.0 + E_u * c / M ** 2)
    if kind == "users-scale":
        _check_alpha(alpha, iota)
        if alpha < 1.0:
            return base
        if N is None or mean_beta is None or mean_ktilde is None:
            raise InvalidArgumentError("alpha = 1 limit needs N, mean_beta and mean_ktilde")
        return base / (1.0 + E_u * iota * mean_ktilde * mean_beta / N)
    raise InvalidArgumentError(f"unknown uplink limit {kind!r}")


def dl_sinrs(users, p_b, M, N, d, scattered_var=None):
    """Downlink conjugate-precoding statistical SINR of every user.

    Parameters
    ----------
    users : sequence of (beta, kappa, theta)
        ``theta`` is the departure angle at the BS.
    p_b : float
        BS transmit power.
    M, N : int
    d : float
    scattered_var : ndarray (K, K), optional
        ``delta2[k, i]``, the variance of user ``k``'s scattered term seen
        through precoder column ``i``. All ones without correlation.
    """
    beta, kbar, ktilde, theta = _unpack(users)
    K = beta.size
    rho2 = np.abs(rho_matrix(theta, d, M)) ** 2
    np.fill_diagonal(rho2, 0.0)
    var_sum = K if scattered_var is None else np.asarray(scattered_var).sum(axis=1)
    los_power = beta * kbar
    den = (1.0 + (p_b * N / (K * M)) * los_power * rho2.sum(axis=1)
           + (p_b * beta * ktilde / K) * var_sum)
    return (p_b * M * N / K) * los_power / den


def dl_statistical_sinr(k, users, p_b, M, N, K, d, scattered_var=None):
    """Downlink statistical SINR of user ``k`` (``K`` must equal ``len(users)``)."""
    if K != len(users):
        raise InvalidArgumentError(f"K={K} but {len(users)} users given")
    if not 0 <= k < K:
        raise InvalidArgumentError(f"user index {k} out of range for K={K}")
    return float(dl_sinrs(users, p_b, M, N, d, scattered_var)[k])


def dl_interference_constant(k, users, M, d):
    """``c_k(K) = beta_k kbar_k sum_{i != k} |rho_ki|^2``."""
    beta, kbar, _, theta = _unpack(users)
    rho2 = np.abs(rho_matrix(theta, d, M)[k]) ** 2
    rho2[k] = 0.0
    return float(beta[k] * kbar[k] * np.sum(rho2))


def dl_limits(kind, E_b, beta_k, kappa_k, *, M=None, c=None, alpha=None, iota=None, N=None):
    """Asymptotic downlink SINR under fixed ``E_b = M N p_b / K``.

    Same ``kind`` values as :func:`ul_limits`; the ``alpha == 1`` case uses
    the user's own ``ktilde_k beta_k``.
    """
    kbar_k, ktilde_k = rician_split(kappa_k)
    base = E_b * beta_k * kbar_k
    if kind == "large-M":
        return base
    if kind == "large-N":
        if M is None or c is None:
            raise InvalidArgumentError("large-N limit needs M and c")
        return base / (1.0 + E_b * c / M ** 2)
    if kind == "users-scale":
        _check_alpha(alpha, iota)
        if alpha < 1.0:
            return base
        if N is None:
            raise InvalidArgumentError("alpha = 1 limit needs N")
        return base / (1.0 + E_b * iota * ktilde_k * beta_k / N)
    raise InvalidArgumentError(f"unknown downlink limit {kind!r}")


def ff_limit_rate(limit_sinr, T, tau):
    """Rate limit of the pilot-based scheme: ``(T - tau) / T * log2(1 + limit_sinr)``."""
    if not 0 <= tau < T:
        raise InvalidArgumentError(f"need 0 <= tau < T, got tau={tau}, T={T}")
    return (T - tau) / T * math.log2(1.0 + limit_sinr)


def favorable_propagation_gap(los_channel):
    """Largest normalised off-diagonal entry of ``Gbar^H Gbar``.

    Each entry ``(k, i)`` is divided by ``sqrt(A_kk A_ii)``, so for LOS
    columns ``sqrt(N beta kbar) r_k`` the result is ``max |rho_ki| / M``.
    """
    G = np.asarray(los_channel)
    A = G.conj().T @ G
    if A.shape[0] < 2:
        return 0.0
    diag = np.sqrt(np.real(np.diag(A)))
    normalised = np.abs(A) / np.outer(diag, diag)
    np.fill_diagonal(normalised, 0.0)
    return float(normalised.max())
