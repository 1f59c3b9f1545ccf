"""Seeded Monte Carlo engine for ergodic rates and parameter sweeps.

Seeding
-------
Every random draw comes from a generator built as::

    Generator(PCG64(SeedSequence(master_seed, spawn_key=(stream, drop, block))))

``stream`` is :data:`TRIAL_STREAM` for channel/pilot realizations and
:data:`DROP_STREAM` for user drops (``block`` omitted). Trials are split
into fixed-size blocks, so results never depend on how blocks are
scheduled across workers, and block statistics are merged in block order.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import math

import numpy as np

from .analytic import (ScalingPolicy, SinrReport, dl_sinrs, su_statistical_sinr,
                       ul_mrc_sinrs, ul_statistical_sinr)
from .beamforming import (DETECTORS, detector_matrix, effective_uplink_channel,
                          los_beamformers)
from .channel import (CellGeometry, CorrelationConfig, RicianLink, draw_user_drop,
                      fixed_angles, rician_channel, scattered_variance)
from .errors import InvalidArgumentError
from .estimation import (PilotConfig, canonical_pilot, ff_uplink_sinrs,
                         mmse_estimate_scattered, pilot_observe)
from .stats import Z95, RateEstimate

__all__ = [
    "Scenario", "ScenarioTemplate", "SweepRow", "KINDS", "SCHEMES", "AXES",
    "trial_rng", "instantaneous_sinr", "statistical_sinrs",
    "statistical_report", "estimate_ergodic_rate", "run_sweep",
    "average_over_drops", "block_size_for",
]

KINDS = ("single-user", "uplink", "downlink")
SCHEMES = ("LOS", "FF")
AXES = ("M", "N", "K", "E_u", "E_b", "kappa", "p_u", "d", "g_b", "g_u", "alpha")

TRIAL_STREAM = 0
DROP_STREAM = 1
DEFAULT_BLOCK = 256
# complex entries drawn per block are capped near this many
BLOCK_BUDGET = 1 << 22


def trial_rng(master_seed, *key):
    """Generator for the sub-stream ``key`` of ``master_seed``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class Scenario:
    """A fully specified simulation point.

    ``links[k]`` is user ``k``'s link to the BS: ``M`` BS antennas with
    spacing ``d_r`` at angle ``theta`` and ``N`` user antennas with spacing
    ``d_t`` at angle ``phi``. For the downlink the same matrix is used
    transposed.
    """

    kind: str
    links: tuple
    scaling: ScalingPolicy
    detector: str = "MRC"
    scheme: str = "LOS"
    pilot: PilotConfig = None
    correlation: CorrelationConfig = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown scenario kind {self.kind!r}")
        if self.scheme not in SCHEMES:
            raise InvalidArgumentError(f"unknown scheme {self.scheme!r}")
        if self.detector not in DETECTORS:
            raise InvalidArgumentError(f"unknown detector {self.detector!r}")
        if not self.links:
            raise InvalidArgumentError("scenario needs at least one link")
        if self.kind == "single-user" and len(self.links) != 1:
            raise InvalidArgumentError("single-user scenario takes exactly one link")
        first = self.links[0]
        for k, link in enumerate(self.links):
            if (link.M, link.N, link.d_r) != (first.M, first.N, first.d_r):
                raise InvalidArgumentError(f"user {k} does not share the array geometry of user 0")
        if self.scheme == "FF":
            if self.pilot is None:
                raise InvalidArgumentError("pilot-based scheme needs a pilot configuration")
            if self.kind == "downlink":
                raise InvalidArgumentError("pilot-based scheme is only simulated for single-user and uplink")
            if self.pilot.tau < self.K:
                raise InvalidArgumentError(
                    f"orthogonal pilots need tau >= K, got tau={self.pilot.tau}, K={self.K}")
        elif self.pilot is not None:
            raise InvalidArgumentError("the LOS-based scheme uses no pilots")

    @property
    def K(self):
        return len(self.links)

    @property
    def M(self):
        return self.links[0].M

    @property
    def N(self):
        return self.links[0].N

    @property
    def power(self):
        return self.scaling.power(self.M, self.N, self.K)

    @property
    def correlated(self):
        return self.correlation is not None and not self.correlation.trivial


def _uplink_terms(scenario, channels):
    tx = [los_beamformers(link).tx for link in scenario.links]
    G, G_los = effective_uplink_channel(channels, tx)
    G_scat = np.stack([ch.scattered @ b for ch, b in zip(channels, tx)], axis=-1)
    return G, G_los, G_scat


def _scattered_power(scenario):
    return [link.beta * link.ktilde for link in scenario.links]


def instantaneous_sinr(scenario, channels, rng=None):
    """Per-realization SINR of every user.

    Parameters
    ----------
    scenario : Scenario
    channels : sequence of ChannelRealization
        One per user; scattered parts may carry a common batch axis.
    rng : numpy.random.Generator, optional
        Source of pilot noise; required by the pilot-based scheme.

    Returns
    -------
    ndarray, shape (..., K)
    """
    p = scenario.power
    if scenario.kind == "downlink":
        return _downlink_sinr(scenario, channels, p)
    if scenario.kind == "single-user" and scenario.scheme == "LOS":
        link = scenario.links[0]
        pair = los_beamformers(link)
        x = np.einsum("m,...mn,n->...", pair.rx.conj(), channels[0].scattered, pair.tx)
        gamma = p * link.beta * link.kbar * link.M * link.N / (p * np.abs(x) ** 2 + 1.0)
        return gamma[..., None]

    G, G_los, G_scat = _uplink_terms(scenario, channels)
    if scenario.scheme == "FF":
        return _ff_sinr(scenario, G, G_los, p, rng)
    L = detector_matrix(G_los, scenario.detector, p, _scattered_power(scenario)).columns
    signal = np.abs(np.sum(L.conj() * G_los, axis=0)) ** 2
    self_scat = np.abs(np.einsum("mk,...mk->...k", L.conj(), G_scat)) ** 2
    cross = np.abs(np.einsum("mk,...mi->...ki", L.conj(), G)) ** 2
    interference = np.sum(cross * (1.0 - np.eye(scenario.K)), axis=-1)
    noise = np.sum(np.abs(L) ** 2, axis=0)
    return p * signal / (p * self_scat + p * interference + noise)


def _ff_sinr(scenario, G, G_los, p, rng):
    if rng is None:
        raise InvalidArgumentError("pilot-based scheme needs an rng for pilot noise")
    tau = scenario.pilot.tau
    p_p = scenario.pilot.pilot_power(p)
    estimates, errors = [], []
    for k, link in enumerate(scenario.links):
        phi = canonical_pilot(tau, k)
        Y = pilot_observe(G[..., k], phi, p_p, rng)
        rep = mmse_estimate_scattered(Y, G_los[:, k], phi, p_p, link.beta, link.ktilde)
        estimates.append(rep.estimate)
        errors.append(rep.error_variance)
    return ff_uplink_sinrs(np.stack(estimates, axis=-1), p, errors)


def _downlink_sinr(scenario, channels, p_b):
    K, M, N = scenario.K, scenario.M, scenario.N
    R = np.stack([link.rx_steering() for link in scenario.links], axis=-1)
    coef = math.sqrt(p_b / (K * M * N))
    out = []
    for k, (link, ch) in enumerate(zip(scenario.links, channels)):
        t_conj = link.tx_steering().conj()
        # c_ki = coef * t_k^H G_k^T conj(r_i)
        c_los = coef * ((ch.los @ t_conj) @ R.conj())
        c_scat = coef * ((ch.scattered @ t_conj) @ R.conj())
        total = c_los + c_scat
        others = np.sum(np.abs(total) ** 2, axis=-1) - np.abs(total[..., k]) ** 2
        others = np.maximum(others, 0.0)
        out.append(np.abs(c_los[k]) ** 2 / (np.abs(c_scat[..., k]) ** 2 + others + 1.0))
    return np.stack(out, axis=-1)


def statistical_sinrs(scenario):
    """Closed-form statistical SINR of every user (LOS-based scheme)."""
    p = scenario.power
    links = scenario.links
    M, N, K = scenario.M, scenario.N, scenario.K
    d = links[0].d_r
    users = [(l.beta, l.kappa, l.theta) for l in links]
    corr = scenario.correlation if scenario.correlated else None
    if scenario.kind == "downlink":
        var = None
        if corr is not None:
            Sb = corr.bs_sqrt(M) if corr.g_b else None
            Su = corr.user_sqrt(N) if corr.g_u else None
            var = np.array([[scattered_variance(li.rx_steering(), lk.tx_steering(), Sb, Su)
                             for li in links] for lk in links])
        return dl_sinrs(users, p, M, N, d, var)
    if corr is None and scenario.kind == "single-user":
        l = links[0]
        return np.array([su_statistical_sinr(p, l.beta, l.kappa, M, N)])
    if corr is None and scenario.detector == "MRC":
        return ul_mrc_sinrs(users, p, M, N, d)
    tx = [los_beamformers(l).tx for l in links]
    G_los = np.stack([l.los() @ b for l, b in zip(links, tx)], axis=-1)
    L = detector_matrix(G_los, scenario.detector, p, _scattered_power(scenario)).columns
    bs_sqrt = user_gain = None
    if corr is not None:
        bs_sqrt = corr.bs_sqrt(M) if corr.g_b else None
        if corr.g_u:
            Su = corr.user_sqrt(N)
            user_gain = [float(np.sum(np.abs(Su @ b) ** 2)) for b in tx]
    return ul_statistical_sinr(L, G_los, _scattered_power(scenario), p, bs_sqrt, user_gain)


def _upper_sinrs(scenario):
    p = scenario.power
    links = scenario.links
    if scenario.kind == "downlink":
        return np.array([p * l.M * l.N * l.beta * l.kbar / scenario.K for l in links])
    if scenario.kind == "single-user" or scenario.detector == "MRC":
        return np.array([p * l.M * l.N * l.beta * l.kbar for l in links])
    tx = [los_beamformers(l).tx for l in links]
    G_los = np.stack([l.los() @ b for l, b in zip(links, tx)], axis=-1)
    L = detector_matrix(G_los, scenario.detector, p, _scattered_power(scenario)).columns
    signal = np.abs(np.sum(L.conj() * G_los, axis=0)) ** 2
    return p * signal / np.sum(np.abs(L) ** 2, axis=0)


def statistical_report(scenario):
    """User-averaged :class:`~losmimo.analytic.SinrReport` of a scenario.

    ``rate_upper`` drops every interference term (noise-only denominator),
    which bounds the per-realization rate of any LOS-based detector.
    """
    sinr = statistical_sinrs(scenario)
    upper = _upper_sinrs(scenario)
    energy = scenario.scaling.energy(scenario.M, scenario.N, scenario.K)
    limit = np.array([energy * l.beta * l.kbar for l in scenario.links])
    return SinrReport(
        statistical_sinr=float(np.mean(sinr)),
        rate_lower=float(np.mean(np.log2(1.0 + sinr))),
        rate_upper=float(np.mean(np.log2(1.0 + upper))),
        limit_rate=float(np.mean(np.log2(1.0 + limit))),
    )


def _run_block(scenario, n, rng):
    corr = scenario.correlation
    channels = [rician_channel(link, corr, rng, batch=n) for link in scenario.links]
    rates = np.log2(1.0 + instantaneous_sinr(scenario, channels, rng))
    avg = rates.mean(axis=1)
    mean = float(avg.mean())
    return n, rates.sum(axis=0), mean, float(np.sum((avg - mean) ** 2))


def _merge(blocks):
    # Chan et al. pairwise update, applied in block order
    n_tot, mean, m2 = 0, 0.0, 0.0
    user_sums = []
    for n, sums, m, s2 in blocks:
        user_sums.append(sums)
        delta = m - mean
        total = n_tot + n
        mean += delta * n / total
        m2 += s2 + delta * delta * n_tot * n / total
        n_tot = total
    per_user = [math.fsum(col) / n_tot for col in zip(*user_sums)]
    return n_tot, mean, max(m2, 0.0), per_user


def block_size_for(scenario):
    """Trials per seeded block; a function of the scenario dimensions only."""
    per_trial = scenario.M * scenario.N * scenario.K
    return max(1, min(DEFAULT_BLOCK, BLOCK_BUDGET // per_trial))


def estimate_ergodic_rate(scenario, trials, master_seed, *, workers=1, block_size=None, drop=0):
    """Monte Carlo estimate of ``E[log2(1 + SINR)]`` averaged over users.

    The pilot-based scheme includes the ``(T - tau) / T`` pre-log factor.

    Parameters
    ----------
    scenario : Scenario
    trials : int
    master_seed : int
    workers : int
        Threads used to evaluate blocks; does not affect the result.
    block_size : int, optional
        Trials per seeded block; defaults to :func:`block_size_for`.
    drop : int
        Drop index folded into the seed key.
    """
    if trials < 1:
        raise InvalidArgumentError(f"trials must be >= 1, got {trials}")
    if block_size is None:
        block_size = block_size_for(scenario)
    n_blocks = -(-trials // block_size)

    def job(b):
        n = min(block_size, trials - b * block_size)
        return _run_block(scenario, n, trial_rng(master_seed, TRIAL_STREAM, drop, b))

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(job, range(n_blocks)))
    else:
        blocks = [job(b) for b in range(n_blocks)]
    n, mean, m2, per_user = _merge(blocks)
    scale = scenario.pilot.prelog if scenario.scheme == "FF" else 1.0
    std = math.sqrt(m2 / (n - 1)) if n > 1 else 0.0
    return RateEstimate(
        mean=mean * scale,
        ci_halfwidth=Z95 * std * scale / math.sqrt(n),
        trials=n,
        master_seed=int(master_seed),
        per_user=tuple(v * scale for v in per_user),
    )


@dataclass(frozen=True)
class ScenarioTemplate:
    """Sweepable scenario description in linear units.

    ``beta=None`` draws large-scale gains from ``geometry`` per drop.
    ``angles`` is ``"given"`` (``theta``/``phi``; single user only),
    ``"formula"`` (``pi/2 + (2k - 1) / (2K)``) or ``"random"``. When
    ``alpha`` is set the user count follows ``K = round(iota * M**alpha)``.
    ``tau=None`` means one pilot per user.
    """

    kind: str = "single-user"
    M: int = 10
    N: int = 10
    K: int = 1
    beta: float = 0.20479
    kappa: float = 10 ** 0.5
    d: float = 0.3
    d_k: float = 0.3
    angles: str = "given"
    theta: float = math.pi / 4
    phi: float = math.pi / 4
    scaling: ScalingPolicy = field(default_factory=lambda: ScalingPolicy("fixed-energy", 100.0))
    detector: str = "MRC"
    scheme: str = "LOS"
    T: int = 196
    tau: int = None
    g_b: float = 0.0
    g_u: float = 0.0
    alpha: float = None
    iota: float = None
    geometry: CellGeometry = field(default_factory=CellGeometry)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown scenario kind {self.kind!r}")
        if self.angles not in ("given", "formula", "random"):
            raise InvalidArgumentError(f"unknown angle mode {self.angles!r}")
        if self.alpha is not None:
            if self.iota is None or not self.iota > 0:
                raise InvalidArgumentError(f"user-scaling mode needs iota > 0, got {self.iota}")
            if not 0 < self.alpha <= 1:
                raise InvalidArgumentError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def users(self):
        if self.kind == "single-user":
            return 1
        if self.alpha is not None:
            return max(1, int(round(self.iota * self.M ** self.alpha)))
        return self.K

    @property
    def random(self):
        return self.beta is None or self.angles == "random"

    def at(self, axis, value):
        """Copy with ``axis`` set to ``value`` (linear units)."""
        if axis in ("M", "N", "K"):
            return replace(self, **{axis: int(round(value))})
        if axis == "E_u":
            return replace(self, scaling=ScalingPolicy("fixed-energy", value))
        if axis == "E_b":
            return replace(self, scaling=ScalingPolicy("downlink-energy", value))
        if axis == "p_u":
            return replace(self, scaling=ScalingPolicy("fixed-power", value))
        if axis in ("kappa", "d", "g_b", "g_u", "alpha"):
            return replace(self, **{axis: float(value)})
        raise InvalidArgumentError(f"unknown sweep axis {axis!r}; expected one of {AXES}")

    def realize(self, master_seed, drop=0):
        """Concrete :class:`Scenario` for drop ``drop``."""
        K = self.users
        if self.angles == "given" and K > 1:
            raise InvalidArgumentError("given angles only apply to a single user; use 'formula' or 'random'")
        beta = np.full(K, self.beta if self.beta is not None else np.nan)
        if self.angles == "given":
            theta, phi = np.array([self.theta]), np.array([self.phi])
        else:
            theta, phi = fixed_angles(K), np.zeros(K)
        if self.random:
            ud = draw_user_drop(K, self.geometry, trial_rng(master_seed, DROP_STREAM, drop),
                                angles="random" if self.angles == "random" else "fixed")
            if self.beta is None:
                beta = ud.beta
            if self.angles == "random":
                theta, phi = ud.theta, ud.phi
        links = tuple(
            RicianLink(M=self.M, N=self.N, beta=float(beta[k]), kappa=self.kappa,
                       theta=float(theta[k]), phi=float(phi[k]), d_r=self.d, d_t=self.d_k)
            for k in range(K))
        pilot = None
        if self.scheme == "FF":
            pilot = PilotConfig(T=self.T, tau=self.tau if self.tau is not None else K)
        corr = CorrelationConfig(self.g_b, self.g_u) if (self.g_b or self.g_u) else None
        return Scenario(kind=self.kind, links=links, scaling=self.scaling, detector=self.detector,
                        scheme=self.scheme, pilot=pilot, correlation=corr)


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep."""

    axis_value: float
    rate: RateEstimate
    report: SinrReport
    K: int


def _check_grid(grid):
    grid = list(grid)
    if not grid:
        raise InvalidArgumentError("sweep grid is empty")
    diffs = np.diff(grid)
    if not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise InvalidArgumentError("sweep grid must be strictly monotone")
    return grid


def run_sweep(template, axis, grid, trials, master_seed, *, workers=1, drop=0, transform=None):
    """Evaluate ``template`` at every grid point for one drop.

    ``transform`` maps a grid value to the linear value applied to the
    template (e.g. dB conversion); ``axis_value`` keeps the grid value.
    The same seed key is reused at every grid point (common random numbers).
    ``trials=0`` skips Monte Carlo and leaves ``rate`` as ``None``.
    """
    grid = _check_grid(grid)
    rows = []
    for value in grid:
        tpl = template.at(axis, transform(value) if transform else value)
        scenario = tpl.realize(master_seed, drop)
        rate = None
        if trials > 0:
            rate = estimate_ergodic_rate(scenario, trials, master_seed, workers=workers, drop=drop)
        rows.append(SweepRow(axis_value=value, rate=rate, report=statistical_report(scenario), K=scenario.K))
    return rows


def average_over_drops(drop_count, template, axis, grid, trials, master_seed, *, workers=1, transform=None):
    """Outer average of :func:`run_sweep` over ``drop_count`` user drops.

    Rates are averaged per drop (not the rate of averaged SINRs). With more
    than one drop the CI is taken across the per-drop means.
    """
    if drop_count < 1:
        raise InvalidArgumentError(f"drop_count must be >= 1, got {drop_count}")
    tables = [run_sweep(template, axis, grid, trials, master_seed, workers=workers, drop=j, transform=transform)
              for j in range(drop_count)]
    if drop_count == 1:
        return tables[0]
    out = []
    for rows in zip(*tables):
        rate = None
        if rows[0].rate is not None:
            means = np.array([r.rate.mean for r in rows])
            mean = math.fsum(means) / drop_count
            ci = Z95 * float(np.std(means, ddof=1)) / math.sqrt(drop_count)
            rate = RateEstimate(mean=mean, ci_halfwidth=ci, trials=sum(r.rate.trials for r in rows),
                                master_seed=int(master_seed))
        report = SinrReport(*(math.fsum(getattr(r.report, f) for r in rows) / drop_count
                              for f in ("statistical_sinr", "rate_lower", "rate_upper", "limit_rate")))
        out.append(SweepRow(axis_value=rows[0].axis_value, rate=rate, report=report,
                            K=rows[0].K))
    return out
