import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from losmimo.beamforming import (detector_matrix, downlink_combine, downlink_precode,
                                 effective_uplink_channel, los_beamformers)
from losmimo.channel import RicianLink, fixed_angles, rician_channel, steering_vector
from losmimo.errors import InvalidArgumentError, SingularMatrixError


@given(M=st.integers(1, 32), N=st.integers(1, 8), theta=st.floats(-1.5, 1.5), phi=st.floats(-1.5, 1.5),
       d=st.floats(0.05, 5.0))
@settings(max_examples=60)
def test_beamformers_are_unit_norm_and_matched(M, N, theta, phi, d):
    link = RicianLink(M=M, N=N, beta=1.0, kappa=1.0, theta=theta, phi=phi, d_r=d, d_t=d)
    pair = los_beamformers(link)
    assert math.isclose(np.linalg.norm(pair.tx), 1.0, rel_tol=1e-12)
    assert math.isclose(np.linalg.norm(pair.rx), 1.0, rel_tol=1e-12)
    gain = pair.rx.conj() @ np.outer(link.rx_steering(), link.tx_steering()) @ pair.tx
    assert abs(gain - math.sqrt(M * N)) < 1e-9 * M * N


def _los_columns(M, thetas, N=1, beta=1.0, kappa=1.0):
    links = [RicianLink(M=M, N=N, beta=beta, kappa=kappa, theta=t) for t in thetas]
    return np.stack([l.los() @ los_beamformers(l).tx for l in links], axis=-1)


def test_mrc_is_the_los_channel():
    G = _los_columns(8, [0.1, 0.7])
    np.testing.assert_array_equal(detector_matrix(G, "MRC").columns, G)


def test_zf_inverts_the_los_channel():
    G = _los_columns(16, fixed_angles(4))
    L = detector_matrix(G, "ZF").columns
    np.testing.assert_allclose(L.conj().T @ G, np.eye(4), atol=1e-9)


def test_zf_rejects_more_users_than_antennas():
    G = _los_columns(3, [0.1, 0.5, 0.9, 1.3])
    with pytest.raises(InvalidArgumentError):
        detector_matrix(G, "ZF")


def test_zf_names_colliding_users():
    G = _los_columns(8, [0.1, 0.9, 0.9 + 1e-13])
    with pytest.raises(SingularMatrixError) as info:
        detector_matrix(G, "ZF")
    assert info.value.users == (1, 2)


def test_mmse_matches_explicit_inverse():
    G = _los_columns(10, [0.2, -0.4, 1.0])
    p, terms = 2.0, [0.1, 0.2, 0.3]
    L = detector_matrix(G, "MMSE", p, terms).columns
    reg = sum(terms) + 1 / p
    np.testing.assert_allclose(L, G @ np.linalg.inv(G.conj().T @ G + reg * np.eye(3)), atol=1e-12)


def test_mmse_tends_to_zf_at_high_power_and_mrc_direction_at_low_power():
    G = _los_columns(12, [0.2, -0.4, 1.0])
    zf = detector_matrix(G, "ZF").columns
    hi = detector_matrix(G, "MMSE", 1e12, [0.0, 0.0, 0.0]).columns
    np.testing.assert_allclose(hi, zf, rtol=1e-6, atol=1e-9)
    lo = detector_matrix(G, "MMSE", 1e-9, [0.0, 0.0, 0.0]).columns
    for k in range(3):
        cos = abs(np.vdot(lo[:, k], G[:, k])) / (np.linalg.norm(lo[:, k]) * np.linalg.norm(G[:, k]))
        assert cos > 1 - 1e-6


def test_mmse_needs_power_and_noise_terms():
    G = _los_columns(4, [0.1, 0.5])
    with pytest.raises(InvalidArgumentError):
        detector_matrix(G, "MMSE")
    with pytest.raises(InvalidArgumentError):
        detector_matrix(G, "ABC")


def test_effective_uplink_channel_shapes(rng):
    links = [RicianLink(M=6, N=2, beta=1.0, kappa=2.0, theta=t) for t in (0.1, 0.6)]
    chans = [rician_channel(l, rng=rng, batch=5) for l in links]
    tx = [los_beamformers(l).tx for l in links]
    G, G_los = effective_uplink_channel(chans, tx)
    assert G.shape == (5, 6, 2) and G_los.shape == (6, 2)
    np.testing.assert_allclose(G[3, :, 1], chans[1].total[3] @ tx[1])


def test_effective_uplink_channel_dimension_errors(rng):
    links = [RicianLink(M=6, N=2, beta=1.0, kappa=2.0), RicianLink(M=5, N=2, beta=1.0, kappa=2.0)]
    chans = [rician_channel(l, rng=rng) for l in links]
    with pytest.raises(InvalidArgumentError):
        effective_uplink_channel(chans, [np.ones(2), np.ones(2)])
    with pytest.raises(InvalidArgumentError):
        effective_uplink_channel(chans[:1], [np.ones(3)])
    with pytest.raises(InvalidArgumentError):
        effective_uplink_channel(chans, [np.ones(2)])


def test_downlink_precoder_and_combiner_deliver_los_gain():
    M, N, K = 16, 4, 3
    R = [steering_vector(M, 0.3, t) for t in fixed_angles(K)]
    t = steering_vector(N, 0.3, 0.2)
    s = np.array([1.0, 0.0, 0.0])
    x = downlink_precode(s, R)
    assert math.isclose(np.linalg.norm(x) ** 2, 1.0 / K)
    H = np.outer(R[0], t)  # M x N, user k receives H^T x
    y = downlink_combine(H.T @ x, t)
    assert abs(y - math.sqrt(M * N / K)) < 1e-9
    # the stacked array form gives the same precoder
    np.testing.assert_allclose(downlink_precode(s, np.stack(R, axis=-1)), x)


def test_downlink_dimension_errors():
    with pytest.raises(InvalidArgumentError):
        downlink_precode(np.ones(2), [np.ones(4)] * 3)
    with pytest.raises(InvalidArgumentError):
        downlink_combine(np.ones(3), np.ones(2))


def test_zf_equals_pseudo_inverse_on_ill_conditioned_preset_angles():
    # users of the ten-user preset at the smallest array size it sweeps
    G = np.stack([steering_vector(30, 0.3, t) for t in fixed_angles(10)], axis=-1)
    L = detector_matrix(G, "ZF").columns
    np.testing.assert_allclose(L.conj().T, np.linalg.pinv(G), rtol=0, atol=1e-6 * np.abs(L).max())
    np.testing.assert_allclose(L.conj().T @ G, np.eye(10), atol=1e-5)
