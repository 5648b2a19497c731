import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.special import log_ndtr, ndtr

from onebit_mimo.bounds import (
    Bim,
    bim_data_lower_oversampled,
    bim_data_m1,
    bim_prior,
    crb_from_bim,
    crb_jackknife,
    fisher_m1,
    moment_information,
    quantized_mean_jacobian,
    quantized_moments,
)
from onebit_mimo.channel import ChannelPrior
from onebit_mimo.config import SystemConfig
from onebit_mimo.harness import pilot_model_for
from onebit_mimo.quantization import arcsin_covariance
from onebit_mimo.system import real_stack, real_stack_matrix


def loglik(R, h, signs, sigma_n2):
    s = R @ h / np.sqrt(sigma_n2 / 2)
    return np.sum(log_ndtr(signs * s))


def fd_hessian(f, x, eps=1e-4):
    n = x.size
    H = np.empty((n, n))
    E = np.eye(n) * eps
    for i in range(n):
        for j in range(n):
            H[i, j] = (f(x + E[i] + E[j]) - f(x + E[i] - E[j]) - f(x - E[i] + E[j]) + f(x - E[i] - E[j])) / (4 * eps * eps)
    return H


def expected_fd_information(R, h, sigma_n2):
    """-E[Hessian of ln p(y_Q | h)] by enumerating every sign pattern."""
    n_obs = R.shape[0]
    J = np.zeros((h.size, h.size))
    s = R @ h / np.sqrt(sigma_n2 / 2)
    for pattern in range(2**n_obs):
        signs = np.array([1.0 if (pattern >> k) & 1 else -1.0 for k in range(n_obs)])
        p = np.prod(ndtr(signs * s))
        J -= p * fd_hessian(lambda x: loglik(R, x, signs, sigma_n2), h)
    return J


def smooth_cov(n, c=0.35):
    return np.eye(n) + c * (np.eye(n, k=1) + np.eye(n, k=-1))


# ------------------------------------------------------------------ prior


def test_prior_uncorrelated():
    np.testing.assert_array_equal(bim_prior(np.eye(6)), 4 * np.eye(12))


def test_prior_correlated_inverse():
    p = ChannelPrior.kronecker(0.75, 5, 2)
    J = bim_prior(p.C_hp)
    C_real = 0.5 * np.kron(np.eye(2), p.C_hp.real)
    np.testing.assert_allclose(J @ C_real, 2 * np.eye(20), atol=1e-10)
    np.testing.assert_array_equal(J, J.T)


def test_prior_singular():
    with pytest.raises(ValueError):
        bim_prior(np.zeros((2, 2)))


# ---------------------------------------------------------------- M = 1 exact


def test_fisher_scalar_toy_vs_finite_differences():
    R = real_stack_matrix(np.array([[1.0 + 0j]]))
    for h, s2 in [(np.array([0.3, -0.8]), 0.5), (np.array([1.2, 0.1]), 2.0), (np.zeros(2), 1.0)]:
        J = fisher_m1(R, h, s2)
        ref = expected_fd_information(R, h, s2)
        assert np.max(np.abs(J - ref)) <= 1e-5 * np.max(np.abs(ref))


def test_fisher_random_instance_vs_finite_differences():
    rng = np.random.default_rng(0)
    Phi = (rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))) / 2
    R = real_stack_matrix(Phi)
    h = rng.standard_normal(4) * 0.7
    J = fisher_m1(R, h, 0.8)
    ref = expected_fd_information(R, h, 0.8)
    assert np.max(np.abs(J - ref)) <= 1e-5 * np.max(np.abs(ref))


def test_fisher_extreme_arguments_are_finite():
    R = np.array([[1.0, 0.0], [0.0, 1.0]])
    J = fisher_m1(R, np.array([60.0, -60.0]), 1e-3)
    assert np.all(np.isfinite(J)) and np.all(J >= 0)


@pytest.fixture(scope="module")
def m1_setup():
    cfg = SystemConfig(n_r=4)
    prior = ChannelPrior.kronecker(0.0, 4, 4)
    return cfg, prior


def test_noise_dominated_m1(m1_setup):
    cfg, prior = m1_setup
    pm = pilot_model_for(cfg, 1, 40, 0.0, prior)
    bim = bim_data_m1(pm.Phi, 1e6, prior, 5, np.random.default_rng(0))
    assert np.linalg.norm(bim.J) < 1e-3 * np.linalg.norm(bim_prior(prior.C_hp))


def test_m1_errors(m1_setup):
    cfg, prior = m1_setup
    pm = pilot_model_for(cfg, 1, 40, 0.0, prior)
    with pytest.raises(ValueError):
        bim_data_m1(pm.Phi, 0.0, prior, 5, np.random.default_rng(0))
    with pytest.raises(ValueError):
        bim_data_m1(pm.Phi, 1.0, prior, 0, np.random.default_rng(0))
    pm2 = pilot_model_for(cfg, 2, 40, 0.0, prior)
    with pytest.raises(ValueError):
        bim_data_m1(pm2.Phi, 1.0, prior, 5, np.random.default_rng(0), C_n=pm2.C_n)


def expected_weight(n_t, sigma_n2):
    """E_a[w(a)] for a ~ N(0, n_t / 2), w the per-observation information."""
    var_k = sigma_n2 / 2
    sd_a = np.sqrt(n_t / 2)

    def integrand(a):
        s = a / np.sqrt(var_k)
        w = np.exp(-s * s - np.log(2 * np.pi) - log_ndtr(s) - log_ndtr(-s)) / var_k
        return w * np.exp(-0.5 * (a / sd_a) ** 2) / (sd_a * np.sqrt(2 * np.pi))

    return integrate.quad(integrand, -12 * sd_a, 12 * sd_a, limit=400, points=[0.0])[0]


@pytest.mark.parametrize("snr", [0.0, 20.0])
def test_m1_bound_semi_analytic(m1_setup, snr):
    # Orthogonal unit-modulus pilots make every noiseless real sample
    # N(0, N_t / 2), so E[J_D] = tau E[w] I and the bound is 2 / (tau E[w] + 4).
    cfg, prior = m1_setup
    pm = pilot_model_for(cfg, 1, 40, snr, prior)
    bim = bim_data_m1(pm.Phi, pm.sigma_n2, prior, 400, np.random.default_rng(1))
    ew = expected_weight(4, pm.sigma_n2)
    n = prior.size
    np.testing.assert_allclose(np.trace(bim.J) / (2 * n), 40 * ew, rtol=3 * bim.trace_se / np.trace(bim.J) + 1e-3)
    bound = crb_from_bim(bim, bim_prior(prior.C_hp)).per_coefficient_bound
    assert bound == pytest.approx(2 / (40 * ew + 4), rel=0.02)


# ------------------------------------------------------------- moments


def test_moments_zero_mean_reduce_to_arcsin():
    rng = np.random.default_rng(2)
    R = rng.standard_normal((5, 4))
    C_n = smooth_cov(5) * 0.8
    mu, C = quantized_moments(R, np.zeros(4), C_n)
    np.testing.assert_array_equal(mu, 0)
    np.testing.assert_allclose(np.diag(C), 0.5, atol=1e-15)
    np.testing.assert_allclose(C, 0.5 * arcsin_covariance(C_n), atol=1e-12)


def test_moments_saturation():
    R = np.array([[1.0, 0.0], [0.0, 1.0]])
    mu, C = quantized_moments(R, np.array([50.0, 40.0]), np.eye(2))
    np.testing.assert_allclose(mu, 1 / np.sqrt(2), rtol=1e-15)
    np.testing.assert_allclose(np.diag(C), 0.0, atol=1e-15)


def test_moments_monte_carlo():
    rng = np.random.default_rng(3)
    R = rng.standard_normal((3, 2))
    h = np.array([0.4, -0.3])
    C_n = smooth_cov(3, 0.5) * 1.3
    mu, C = quantized_moments(R, h, C_n)
    n = 1_000_000
    e = np.linalg.cholesky(C_n / 2) @ rng.standard_normal((3, n))
    q = np.where((R @ h)[:, None] + e >= 0, 1.0, -1.0) / np.sqrt(2)
    mu_hat = q.mean(axis=1)
    assert np.all(np.abs(mu_hat - mu) < 3 * q.std(axis=1) / np.sqrt(n))
    d = q - mu[:, None]
    for k in range(3):
        for m in range(3):
            prod = d[k] * d[m]
            assert abs(prod.mean() - C[k, m]) < 3 * prod.std() / np.sqrt(n) + 1e-12


def test_jacobian_zero_mean():
    rng = np.random.default_rng(4)
    R = rng.standard_normal((4, 3))
    C_n = smooth_cov(4) * 2.0
    D = quantized_mean_jacobian(R, np.zeros(3), C_n)
    np.testing.assert_allclose(D, np.sqrt(2 / (np.pi * np.diag(C_n)))[:, None] * R, rtol=1e-14)
    D2 = quantized_mean_jacobian(R, np.zeros(3), 2 * C_n)
    np.testing.assert_allclose(D2, D / np.sqrt(2), rtol=1e-14)


@given(seed=st.integers(0, 10_000))
def test_jacobian_finite_differences(seed):
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((5, 4))
    h = rng.standard_normal(4) * 0.5
    C_n = smooth_cov(5) * rng.uniform(0.5, 3)
    D = quantized_mean_jacobian(R, h, C_n)
    eps = 1e-6
    fd = np.column_stack([
        (quantized_moments(R, h + eps * e, C_n)[0] - quantized_moments(R, h - eps * e, C_n)[0]) / (2 * eps)
        for e in np.eye(4)
    ])
    assert np.max(np.abs(fd - D)) <= 1e-5 * np.max(np.abs(D))


def test_moment_information_matches_direct_formula():
    rng = np.random.default_rng(5)
    R = rng.standard_normal((6, 4))
    h = rng.standard_normal(4) * 0.3
    C_n = smooth_cov(6) * 1.5
    _, C = quantized_moments(R, h, C_n)
    D = quantized_mean_jacobian(R, h, C_n)
    np.testing.assert_allclose(moment_information(R, h, C_n), D.T @ np.linalg.solve(C, D), rtol=1e-9, atol=1e-12)


def test_moment_information_high_snr_is_finite():
    rng = np.random.default_rng(6)
    R = rng.standard_normal((30, 4))
    C_n = smooth_cov(30, 0.45) * 1e-3
    J = moment_information(R, rng.standard_normal(4), C_n)
    assert np.all(np.isfinite(J))
    assert np.linalg.eigvalsh(J).min() > -1e-8 * np.linalg.norm(J)


# ------------------------------------------------------ BIM comparisons


@pytest.fixture(scope="module")
def m1_draws(m1_setup):
    cfg, prior = m1_setup
    pm = pilot_model_for(cfg, 1, 40, 5.0, prior)
    exact = bim_data_m1(pm.Phi, pm.sigma_n2, prior, 20, np.random.default_rng(7))
    lower = bim_data_lower_oversampled(pm.Phi, pm.C_n, prior, 20, np.random.default_rng(7))
    return prior, exact, lower


def test_moment_bound_below_exact_at_m1(m1_draws):
    prior, exact, lower = m1_draws
    diff = exact.J - lower.J
    scale = np.linalg.norm(exact.J)
    assert np.linalg.eigvalsh(diff).min() >= -1e-4 * scale
    # white noise: the bound is tight
    assert np.linalg.norm(diff) <= 1e-3 * scale


def test_crb_ordering_at_m1(m1_draws):
    prior, exact, lower = m1_draws
    Jp = bim_prior(prior.C_hp)
    b_exact = crb_from_bim(exact, Jp).per_coefficient_bound
    b_lower = crb_from_bim(lower, Jp).per_coefficient_bound
    assert b_lower >= b_exact * (1 - 1e-4)
    assert b_lower == pytest.approx(b_exact, rel=1e-3)


def test_bims_symmetric_psd(m1_draws):
    _, exact, lower = m1_draws
    for bim in (exact, lower):
        np.testing.assert_allclose(bim.J, bim.J.T, atol=1e-10 * np.linalg.norm(bim.J))
        assert np.linalg.eigvalsh(bim.J).min() >= -1e-8 * np.linalg.norm(bim.J)
        assert bim.n_draws == 20 and bim.trace_se > 0


def test_noise_dominated_oversampled():
    cfg = SystemConfig(n_r=4)
    prior = ChannelPrior.kronecker(0.0, 4, 4)
    pm = pilot_model_for(cfg, 2, 8, -60.0, prior)
    bim = bim_data_lower_oversampled(pm.Phi, pm.C_n, prior, 3, np.random.default_rng(0))
    assert np.linalg.norm(bim.J) < 1e-3 * np.linalg.norm(bim_prior(prior.C_hp))


def test_information_grows_with_tau():
    cfg = SystemConfig(n_r=4)
    prior = ChannelPrior.kronecker(0.0, 4, 4)
    traces = []
    for tau in (8, 16, 40):
        pm = pilot_model_for(cfg, 2, tau, 5.0, prior)
        bim = bim_data_lower_oversampled(pm.Phi, pm.C_n, prior, 10, np.random.default_rng(8))
        traces.append((np.trace(bim.J), bim.trace_se))
    for (a, sa), (b, sb) in zip(traces, traces[1:]):
        assert b > a + 2 * np.hypot(sa, sb) or b > 1.5 * a


def test_bound_non_increasing_in_snr():
    cfg = SystemConfig(n_r=4)
    prior = ChannelPrior.kronecker(0.0, 4, 4)
    bounds = []
    for snr in (0, 5, 10, 15, 20):
        pm = pilot_model_for(cfg, 2, 16, snr, prior)
        bim = bim_data_lower_oversampled(pm.Phi, pm.C_n, prior, 8, np.random.default_rng(9))
        bounds.append(crb_from_bim(bim, bim_prior(prior.C_hp)).per_coefficient_bound)
    assert all(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:]))


def test_workers_bit_identical():
    cfg = SystemConfig(n_r=4)
    prior = ChannelPrior.kronecker(0.0, 4, 4)
    pm = pilot_model_for(cfg, 2, 8, 5.0, prior)
    a = bim_data_lower_oversampled(pm.Phi, pm.C_n, prior, 6, np.random.default_rng(1), workers=1)
    b = bim_data_lower_oversampled(pm.Phi, pm.C_n, prior, 6, np.random.default_rng(1), workers=2)
    np.testing.assert_array_equal(a.J, b.J)


# ---------------------------------------------------------------- CRB


def test_prior_only_bound():
    n = 6
    rep = crb_from_bim(np.zeros((2 * n, 2 * n)), bim_prior(np.eye(n)))
    np.testing.assert_allclose(rep.J_complex, 2 * np.eye(n))
    assert rep.per_coefficient_bound == pytest.approx(0.5)
    assert rep.summed_bound == pytest.approx(1.0)


def test_chain_rule_complex_structure():
    # a real BIM of the form [[A, -B], [B, A]] maps to (A + jB) / 2
    rng = np.random.default_rng(10)
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    Jc = X @ X.conj().T + np.eye(3)
    J = 2 * real_stack_matrix(Jc)
    J[:3, 3:], J[3:, :3] = J[:3, 3:].copy(), J[3:, :3].copy()
    rep = crb_from_bim(J, np.zeros_like(J))
    np.testing.assert_allclose(rep.J_complex, Jc.conj(), atol=1e-12)
    np.testing.assert_allclose(rep.J_complex, rep.J_complex.conj().T, atol=1e-12)


def test_crb_jackknife_interval(m1_draws):
    prior, exact, _ = m1_draws
    b, hw = crb_jackknife(exact, bim_prior(prior.C_hp))
    assert b == crb_from_bim(exact, bim_prior(prior.C_hp)).per_coefficient_bound
    assert 0 < hw < 0.1 * b
    single = Bim(exact.J, "exact-m1", 0.0, exact.samples[:1])
    assert crb_jackknife(single, bim_prior(prior.C_hp))[1] == 0.0
