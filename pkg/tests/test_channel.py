import numpy as np
import pytest
from hypothesis import given, strategies as st

from onebit_mimo.channel import ChannelPrior, CorrelationSettings, receive_correlation, sample_channel


def test_rho_zero_is_identity():
    R, S = receive_correlation(0.0, 5)
    np.testing.assert_array_equal(R, np.eye(5))
    np.testing.assert_allclose(S, np.eye(5), atol=1e-15)


def test_displayed_pattern():
    R, _ = receive_correlation(0.75, 3)
    expected = np.array([[1, 0.75, 0.75**4], [0.75, 1, 0.75], [0.75**4, 0.75, 1]])
    np.testing.assert_array_equal(R, expected)


def test_rho_075_n16_psd():
    R, S = receive_correlation(0.75, 16)
    assert np.linalg.eigvalsh(R).min() >= -1e-10
    np.testing.assert_allclose(S @ S, R, atol=1e-12)
    np.testing.assert_allclose(S, S.T, atol=1e-15)


@pytest.mark.parametrize("rho", [-0.1, 1.0, 1.5])
def test_rho_out_of_range(rho):
    with pytest.raises(ValueError):
        receive_correlation(rho, 4)


@given(rho=st.floats(0.0, 0.99), n=st.integers(1, 24))
def test_psd_for_all_rho(rho, n):
    R, S = receive_correlation(rho, n)
    assert np.linalg.eigvalsh(R).min() >= -1e-10
    np.testing.assert_allclose(S @ S, R, atol=1e-8)


def test_prior_structure():
    p = ChannelPrior.kronecker(0.75, 4, 3)
    np.testing.assert_allclose(p.C_hp, np.kron(np.eye(3), p.R_r), atol=0)
    np.testing.assert_allclose(p.C_hp, p.C_hp.conj().T, atol=1e-12)
    np.testing.assert_array_equal(np.diag(p.C_hp), 1.0)
    assert ChannelPrior.from_settings(CorrelationSettings(0.75, 4, 3)).size == 12


def test_prior_with_transmit_correlation():
    Rt = np.array([[1.0, 0.3], [0.3, 1.0]])
    p = ChannelPrior.kronecker(0.5, 3, 2, R_t=Rt)
    np.testing.assert_allclose(p.C_hp, np.kron(Rt.T, p.R_r))


def test_uncorrelated_entry_variance():
    p = ChannelPrior.kronecker(0.0, 4, 2)
    H = sample_channel(p, np.random.default_rng(0), 100_000)
    var = np.mean(np.abs(H) ** 2, axis=0)
    np.testing.assert_allclose(var, 1.0, rtol=0.02)
    # independent real and imaginary parts of variance 1/2
    np.testing.assert_allclose(np.mean(H.real**2, axis=0), 0.5, rtol=0.03)
    assert abs(np.mean(H.real * H.imag)) < 0.01


def test_correlated_covariance_monte_carlo():
    p = ChannelPrior.kronecker(0.75, 4, 2)
    H = sample_channel(p, np.random.default_rng(1), 100_000)
    h = H.transpose(0, 2, 1).reshape(H.shape[0], -1)  # column-major vec
    C = h.T @ h.conj() / h.shape[0]
    assert np.max(np.abs(C - p.C_hp)) < 0.02


def test_zero_mean():
    p = ChannelPrior.kronecker(0.5, 3, 2)
    n = 50_000
    H = sample_channel(p, np.random.default_rng(2), n)
    mean = H.mean(axis=0)
    se = np.sqrt(1.0 / n)  # per complex entry, unit variance
    assert np.all(np.abs(mean) < 3 * se * np.sqrt(2))


def test_sample_is_reproducible():
    p = ChannelPrior.kronecker(0.3, 4, 2)
    a = sample_channel(p, np.random.default_rng(9))
    b = sample_channel(p, np.random.default_rng(9))
    np.testing.assert_array_equal(a, b)
    assert a.shape == (4, 2)
