import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from losmimo.channel import (CellGeometry, CorrelationConfig, RicianLink, correlation_sqrt,
                             draw_user_drop, exponential_correlation, fixed_angles, los_matrix,
                             rician_channel, sample_scattered, scattered_variance, steering_vector)
from losmimo.errors import InvalidArgumentError


@given(count=st.integers(1, 64), spacing=st.floats(0.01, 30), angle=st.floats(-math.pi, math.pi))
def test_steering_vector_entries(count, spacing, angle):
    a = steering_vector(count, spacing, angle)
    assert a.shape == (count,)
    assert a[0] == 1 + 0j
    np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)
    m = np.arange(count)
    expected = np.array([complex(math.cos(x), math.sin(x)) for x in 2 * math.pi * m * spacing * math.sin(angle)])
    np.testing.assert_allclose(a, expected, atol=1e-9)


def test_steering_vector_broadside_is_all_ones():
    np.testing.assert_array_equal(steering_vector(8, 0.5, 0.0), np.ones(8))


@pytest.mark.parametrize("count,spacing", [(0, 0.3), (-2, 0.3), (2.5, 0.3), (4, 0.0), (4, -1.0)])
def test_steering_vector_rejects_bad_arguments(count, spacing):
    with pytest.raises(InvalidArgumentError):
        steering_vector(count, spacing, 0.1)


def test_los_matrix_is_rank_one_without_conjugation():
    r = steering_vector(6, 0.3, 0.4)
    t = steering_vector(3, 0.3, -0.2)
    H = los_matrix(r, t)
    assert np.linalg.matrix_rank(H) == 1
    assert H[2, 1] == r[2] * t[1]


def test_rician_split_sums_to_one_exactly():
    for kappa in (1e-9, 0.5, 1.0, 10 ** 0.5, 1e6, 1e12):
        link = RicianLink(M=2, N=2, beta=1.0, kappa=kappa)
        assert link.kbar + link.ktilde == 1.0


@pytest.mark.parametrize("kw", [dict(kappa=0.0), dict(kappa=-1.0), dict(beta=0.0), dict(M=0)])
def test_rician_link_validation(kw):
    args = dict(M=4, N=2, beta=1.0, kappa=1.0)
    args.update(kw)
    with pytest.raises(InvalidArgumentError):
        RicianLink(**args)


def test_sample_scattered_unit_variance(rng):
    h = sample_scattered(4, 3, rng, batch=20000)
    assert h.shape == (20000, 4, 3)
    assert abs(np.mean(np.abs(h) ** 2) - 1.0) < 0.01
    assert abs(np.mean(h)) < 0.01
    # circular symmetry: E[h^2] = 0
    assert abs(np.mean(h ** 2)) < 0.01


def test_rician_channel_decomposition(rng):
    link = RicianLink(M=5, N=3, beta=0.3, kappa=2.0, theta=0.4, phi=-0.1)
    ch = rician_channel(link, rng=rng)
    np.testing.assert_allclose(ch.total, ch.los + ch.scattered)
    assert np.linalg.matrix_rank(ch.los) == 1
    np.testing.assert_allclose(np.abs(ch.los) ** 2, link.beta * link.kbar)


def test_rician_channel_power_split(rng):
    link = RicianLink(M=4, N=2, beta=0.5, kappa=3.0)
    ch = rician_channel(link, rng=rng, batch=50000)
    assert abs(np.mean(np.abs(ch.scattered) ** 2) / (link.beta * link.ktilde) - 1) < 0.01
    # total per-entry power is beta
    assert abs(np.mean(np.abs(ch.total) ** 2) / link.beta - 1) < 0.01


def test_rician_channel_is_deterministic_given_seed():
    link = RicianLink(M=4, N=2, beta=0.5, kappa=3.0)
    a = rician_channel(link, rng=np.random.default_rng(9), batch=3)
    b = rician_channel(link, rng=np.random.default_rng(9), batch=3)
    np.testing.assert_array_equal(a.scattered, b.scattered)


def test_zero_correlation_reproduces_uncorrelated_draw_bit_for_bit():
    link = RicianLink(M=6, N=3, beta=0.5, kappa=3.0)
    a = rician_channel(link, rng=np.random.default_rng(1))
    b = rician_channel(link, CorrelationConfig(0.0, 0.0), rng=np.random.default_rng(1))
    np.testing.assert_array_equal(a.scattered, b.scattered)


def test_rician_channel_requires_rng():
    with pytest.raises(InvalidArgumentError):
        rician_channel(RicianLink(M=2, N=2, beta=1.0, kappa=1.0))


@given(size=st.integers(1, 24), g=st.floats(0.0, 0.999))
@settings(max_examples=50)
def test_exponential_correlation_properties(size, g):
    S = exponential_correlation(size, g)
    np.testing.assert_allclose(np.diag(S), 1.0)
    assert math.isclose(np.trace(S), size)
    np.testing.assert_allclose(S, S.T)
    assert np.linalg.eigvalsh(S).min() > -1e-10
    root = correlation_sqrt(S)
    np.testing.assert_allclose(root @ root.conj().T, S, atol=1e-9)


def test_exponential_correlation_entries():
    S = exponential_correlation(4, 0.5)
    assert S[0, 3] == 0.125 and S[3, 1] == 0.25


@pytest.mark.parametrize("g", [-0.1, 1.1])
def test_exponential_correlation_rejects_out_of_range(g):
    with pytest.raises(InvalidArgumentError):
        exponential_correlation(3, g)


def test_fully_correlated_matrix_has_rank_one_root():
    root = correlation_sqrt(exponential_correlation(5, 1.0))
    np.testing.assert_allclose(root @ root, np.ones((5, 5)), atol=1e-9)


def test_correlation_sqrt_rejects_indefinite_and_non_hermitian():
    with pytest.raises(InvalidArgumentError):
        correlation_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(InvalidArgumentError):
        correlation_sqrt(np.array([[1.0, 0.5], [0.1, 1.0]]))


def test_correlation_sqrt_identity_shortcut():
    np.testing.assert_array_equal(correlation_sqrt(np.eye(4)), np.eye(4))


def test_correlated_scattered_covariance(rng):
    corr = CorrelationConfig(g_b=0.7, g_u=0.0)
    link = RicianLink(M=4, N=1, beta=1.0, kappa=1.0)
    ch = rician_channel(link, corr, rng=rng, batch=100000)
    h = ch.scattered[..., 0] / math.sqrt(link.beta * link.ktilde)
    cov = h.T @ h.conj() / h.shape[0]
    np.testing.assert_allclose(cov, exponential_correlation(4, 0.7), atol=0.02)


def test_scattered_variance_matches_monte_carlo(rng):
    corr = CorrelationConfig(g_b=0.6, g_u=0.4)
    r = steering_vector(6, 0.3, 0.3)
    t = steering_vector(3, 0.3, -0.5)
    Sb, Su = corr.bs_sqrt(6), corr.user_sqrt(3)
    delta2 = scattered_variance(r, t, Sb, Su)
    H = Sb @ sample_scattered(6, 3, rng, batch=100000) @ Su
    x = np.einsum("m,bmn,n->b", r.conj(), H, t.conj())
    assert abs(np.mean(np.abs(x) ** 2) / (6 * 3) / delta2 - 1) < 0.02


def test_scattered_variance_uncorrelated_is_one():
    assert math.isclose(scattered_variance(steering_vector(5, 0.3, 0.2), steering_vector(2, 0.3, 1.0)), 1.0)


def test_fixed_angles_formula():
    np.testing.assert_allclose(fixed_angles(2), [math.pi / 2 + 0.25, math.pi / 2 + 0.75])


@pytest.mark.parametrize("placement", ["radius", "area"])
def test_mean_gain_matches_sample_mean(placement):
    # sigma = 0 removes the heavy shadowing tail so 2e5 draws give a tight check
    geo = CellGeometry(sigma_db=0.0, placement=placement)
    drop = draw_user_drop(200000, geo, np.random.default_rng(3))
    assert abs(np.mean(drop.beta) / geo.mean_gain() - 1) < 0.01


def test_mean_gain_shadowing_factor():
    base = CellGeometry(sigma_db=0.0).mean_gain()
    s = 8 * math.log(10) / 10
    assert math.isclose(CellGeometry().mean_gain(), base * math.exp(s * s / 2))


def test_user_drop_invariants():
    geo = CellGeometry()
    drop = draw_user_drop(500, geo, np.random.default_rng(5))
    assert drop.K == 500
    assert np.all((drop.r >= geo.r_h) & (drop.r <= geo.r_m))
    np.testing.assert_allclose(drop.beta, drop.z / (drop.r / geo.r_h) ** geo.v)
    assert np.all(np.abs(drop.theta) <= math.pi / 2)
    assert np.min(np.diff(np.sort(drop.theta))) >= 1e-6


def test_user_drop_fixed_angles():
    drop = draw_user_drop(4, rng=np.random.default_rng(0), angles="fixed")
    np.testing.assert_array_equal(drop.theta, fixed_angles(4))
    np.testing.assert_array_equal(drop.phi, np.zeros(4))


def test_user_drop_deterministic():
    a = draw_user_drop(7, rng=np.random.default_rng(11))
    b = draw_user_drop(7, rng=np.random.default_rng(11))
    np.testing.assert_array_equal(a.beta, b.beta)
    np.testing.assert_array_equal(a.theta, b.theta)


def test_user_drop_validation():
    with pytest.raises(InvalidArgumentError):
        draw_user_drop(0, rng=np.random.default_rng(0))
    with pytest.raises(InvalidArgumentError):
        CellGeometry(r_h=10, r_m=5)
