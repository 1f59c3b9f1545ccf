"""Beamformers and linear detectors built from LOS knowledge only.

Nothing in this module looks at the scattered part of a channel: the
transmit/receive weights, the downlink precoder and the uplink detector
matrices are all functions of steering vectors, large-scale gains and
Rician factors.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidArgumentError, SingularMatrixError

__all__ = [
    "BeamformerPair", "DetectorMatrix", "DETECTORS", "los_beamformers",
    "effective_uplink_channel", "detector_matrix", "downlink_precode",
    "downlink_combine",
]

DETECTORS = ("MRC", "ZF", "MMSE")
# ZF Gram matrices worse conditioned than this are treated as singular.
MAX_CONDITION = 1e10


@dataclass(frozen=True)
class BeamformerPair:
    """Unit-norm transmit (``tx``, length N) and receive (``rx``, length M) weights."""

    tx: np.ndarray
    rx: np.ndarray


@dataclass(frozen=True)
class DetectorMatrix:
    """``M x K`` detector whose column ``k`` is applied as ``lambda_k^H y``."""

    columns: np.ndarray
    kind: str

    @property
    def K(self):
        return self.columns.shape[1]


def los_beamformers(link):
    """Conjugate beamformers matched to the specular component of ``link``.

    The transmit weight is conjugated so that ``rx^H (r t^T) tx`` equals
    ``sqrt(M N)`` exactly.
    """
    t = link.tx_steering()
    r = link.rx_steering()
    return BeamformerPair(tx=t.conj() / math.sqrt(link.N), rx=r / math.sqrt(link.M))


def effective_uplink_channel(channels, beamformers):
    """Combine per-user channels with their transmit beamformers.

    Parameters
    ----------
    channels : sequence of ChannelRealization
        One per user, all with the same receive dimension. The scattered
        parts may share a leading batch axis.
    beamformers : sequence of ndarray
        Transmit vector ``b_k`` of each user.

    Returns
    -------
    G : ndarray, shape (..., M, K)
        Column ``k`` is ``G_k b_k``.
    G_los : ndarray, shape (M, K)
        Column ``k`` is the specular part ``Gbar_k b_k``.
    """
    if len(channels) != len(beamformers) or len(channels) == 0:
        raise InvalidArgumentError(
            f"need one beamformer per user, got {len(channels)} channels and {len(beamformers)} beamformers")
    M = channels[0].los.shape[0]
    for k, (ch, b) in enumerate(zip(channels, beamformers)):
        if ch.los.shape[0] != M:
            raise InvalidArgumentError(f"user {k} has {ch.los.shape[0]} receive antennas, expected {M}")
        if ch.los.shape[1] != np.shape(b)[0]:
            raise InvalidArgumentError(
                f"user {k}: beamformer length {np.shape(b)[0]} does not match {ch.los.shape[1]} antennas")
    G_los = np.stack([ch.los @ b for ch, b in zip(channels, beamformers)], axis=-1)
    G = np.stack([ch.total @ b for ch, b in zip(channels, beamformers)], axis=-1)
    return G, G_los


def _colliding_pair(G_los):
    norms = np.linalg.norm(G_los, axis=0)
    coherence = np.abs(G_los.conj().T @ G_los) / np.outer(norms, norms)
    np.fill_diagonal(coherence, -np.inf)
    i, k = np.unravel_index(np.argmax(coherence), coherence.shape)
    return tuple(sorted((int(i), int(k))))


def detector_matrix(los_channel, kind, p_u=None, noise_terms=None):
    """Build an MRC, ZF or MMSE detector from the LOS channel.

    Parameters
    ----------
    los_channel : ndarray, shape (M, K)
        Columns ``gbar_k``.
    kind : {"MRC", "ZF", "MMSE"}
    p_u : float
        Per-user transmit power; required for MMSE.
    noise_terms : sequence of float
        ``beta_k * ktilde_k`` for every user; required for MMSE.

    Returns
    -------
    DetectorMatrix
    """
    G = np.asarray(los_channel)
    M, K = G.shape
    if kind == "MRC":
        return DetectorMatrix(columns=G.copy(), kind=kind)
    gram = G.conj().T @ G
    if kind == "ZF":
        if K > M:
            raise InvalidArgumentError(f"ZF needs K <= M, got K={K}, M={M}")
        if np.linalg.cond(gram) > MAX_CONDITION:
            users = _colliding_pair(G)
            raise SingularMatrixError(
                f"LOS Gram matrix is singular; users {users[0]} and {users[1]} have colliding angles",
                users=users)
        # Lambda = G gram^-1  <=>  Lambda^H = gram^-1 G^H (gram is Hermitian)
        return DetectorMatrix(columns=np.linalg.solve(gram, G.conj().T).conj().T, kind=kind)
    if kind == "MMSE":
        if p_u is None or noise_terms is None:
            raise InvalidArgumentError("MMSE detector needs p_u and noise_terms")
        if not p_u > 0:
            raise InvalidArgumentError(f"p_u must be positive, got {p_u}")
        reg = math.fsum(noise_terms) + 1.0 / p_u
        A = gram + reg * np.eye(K)
        return DetectorMatrix(columns=np.linalg.solve(A, G.conj().T).conj().T, kind=kind)
    raise InvalidArgumentError(f"unknown detector {kind!r}; expected one of {DETECTORS}")


def downlink_precode(symbols, bs_steering):
    """Conjugate precoder ``X = sum_k conj(r_k) s_k / sqrt(K M)``.

    Parameters
    ----------
    symbols : array_like, shape (..., K)
    bs_steering : sequence of K steering vectors, or ndarray (M, K)
    """
    if isinstance(bs_steering, (list, tuple)):
        R = np.stack([np.asarray(r) for r in bs_steering], axis=-1)
    else:
        R = np.asarray(bs_steering)
    M, K = R.shape
    s = np.asarray(symbols)
    if s.shape[-1] != K:
        raise InvalidArgumentError(f"expected {K} symbols, got {s.shape[-1]}")
    return (s @ R.conj().T) / math.sqrt(K * M)


def downlink_combine(received, t_k):
    """User-side combiner ``t_k^H y / sqrt(N)``."""
    t_k = np.asarray(t_k)
    received = np.asarray(received)
    if received.shape[-1] != t_k.size:
        raise InvalidArgumentError(f"received length {received.shape[-1]} != {t_k.size}")
    return received @ t_k.conj() / math.sqrt(t_k.size)
