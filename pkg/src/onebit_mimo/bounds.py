"""Bayesian information matrices and the resulting Bayesian CRB.

All BIMs act on the real parameter ``h~ = [Re h'; Im h']``. For M = 1 (white
noise) the data information is exact; for oversampled receivers it is
replaced by the lower bound ``D^T C^{-1} D`` built from the mean ``mu`` and
covariance ``C`` of the quantized samples, with ``D`` the Jacobian of ``mu``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import erfc, log_ndtr, ndtr

from .channel import ChannelPrior, sample_channel
from .linalg import HermitianFactor, hermitian_solve
from .orthant import bvn_upper, orthant_prob
from .parallel import ordered_map
from .system import real_stack, real_stack_matrix

__all__ = [
    "Bim",
    "CrbReport",
    "gaussian_tail",
    "bim_prior",
    "fisher_m1",
    "bim_data_m1",
    "quantized_moments",
    "quantized_mean_jacobian",
    "moment_information",
    "bim_data_lower_oversampled",
    "crb_from_bim",
    "crb_jackknife",
    "VAR_FLOOR",
]

# quantized samples whose conditional variance is below this carry no usable
# second-order information; dropping them can only lower the BIM
VAR_FLOOR = 1e-10
_SQRT_HALF = np.sqrt(0.5)


@dataclass(frozen=True)
class Bim:
    """A BIM over ``h~`` with Monte Carlo bookkeeping.

    Attributes:
        J: symmetric ``2n x 2n`` matrix.
        kind: ``"exact-m1"``, ``"moment-lower-bound"`` or ``"prior"``.
        trace_se: standard error of ``trace(J)`` over channel draws.
        samples: optional per-draw matrices whose mean is ``J``.
    """

    J: np.ndarray
    kind: str
    trace_se: float = 0.0
    samples: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_draws(self) -> int:
        return 0 if self.samples is None else self.samples.shape[0]


@dataclass(frozen=True)
class CrbReport:
    """Bayesian CRB derived from a BIM.

    ``per_coefficient_bound`` is the mean of the real diagonal of the inverse
    complex-domain BIM, i.e. the bound on ``E|h_i - h^_i|^2 / 2`` per
    coefficient. ``summed_bound`` is twice that, the bound on the full
    per-coefficient squared error (real plus imaginary parts).
    """

    per_coefficient_bound: float
    J_complex: np.ndarray

    @property
    def summed_bound(self) -> float:
        return 2.0 * self.per_coefficient_bound


def gaussian_tail(x):
    """Standard normal tail ``Q(x)``."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def _real_prior_cov(C_hp: np.ndarray) -> np.ndarray:
    C = np.asarray(C_hp)
    return 0.5 * np.block([[C.real, -C.imag], [C.imag, C.real]])


def bim_prior(C_hp: np.ndarray) -> np.ndarray:
    """Prior information ``2 C_h~^{-1}`` for a Gaussian prior on ``h'``."""
    C_real = _real_prior_cov(C_hp)
    try:
        J = 2.0 * np.linalg.inv(C_real)
    except np.linalg.LinAlgError as exc:
        raise ValueError("prior covariance is singular") from exc
    if not np.all(np.isfinite(J)):
        raise ValueError("prior covariance is singular")
    return 0.5 * (J + J.T)


# ---------------------------------------------------------------- M = 1 exact


def fisher_m1(R: np.ndarray, h_tilde: np.ndarray, sigma_n2: float) -> np.ndarray:
    """Fisher information of sign observations ``sign(R h~ + e)``.

    Each real observation has noise variance ``sigma_n2 / 2`` and contributes
    ``phi(s)^2 / (Q(s) Q(-s) sigma_k^2)`` times the outer product of its
    regressor row, where ``s`` is the normalized noiseless sample.
    """
    var = 0.5 * sigma_n2
    s = (R @ h_tilde) / np.sqrt(var)
    logw = -s * s - np.log(2 * np.pi) - log_ndtr(s) - log_ndtr(-s)
    w = np.exp(logw) / var
    return R.T @ (w[:, None] * R)


def _m1_one(R, sigma_n2, h_tilde):
    return fisher_m1(R, h_tilde, sigma_n2)


def _average(samples: np.ndarray, kind: str) -> Bim:
    n = samples.shape[0]
    J = samples.sum(axis=0) / n
    J = 0.5 * (J + J.T)
    tr = np.trace(samples, axis1=1, axis2=2)
    se = float(np.std(tr, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return Bim(J, kind, se, samples)


def _draw_h_tilde(prior: ChannelPrior, n_draws: int, rng) -> list[np.ndarray]:
    H = sample_channel(prior, rng, n_draws)
    return [real_stack(Hd.reshape(-1, order="F")) for Hd in H]


def bim_data_m1(
    Phi: np.ndarray,
    sigma_n2: float,
    prior: ChannelPrior,
    n_channel_draws: int,
    rng: np.random.Generator,
    C_n: np.ndarray | None = None,
    workers: int = 1,
) -> Bim:
    """Exact data BIM for white noise, averaged over channel draws.

    Args:
        C_n: optional per-antenna noise covariance, checked to be diagonal up
            to filter truncation (relative off-diagonal tolerance 1e-4).
    """
    if sigma_n2 <= 0:
        raise ValueError("sigma_n2 must be positive")
    if n_channel_draws < 1:
        raise ValueError("n_channel_draws must be >= 1")
    if C_n is not None:
        off = C_n - np.diag(np.diag(C_n))
        if np.max(np.abs(off)) > 1e-4 * np.max(np.abs(np.diag(C_n))):
            raise ValueError("exact BIM requires white noise")
    R = real_stack_matrix(Phi)
    draws = _draw_h_tilde(prior, n_channel_draws, rng)
    samples = np.stack(ordered_map(partial(_m1_one, R, sigma_n2), draws, workers))
    return _average(samples, "exact-m1")


# ------------------------------------------------------------ moment bound


def _moment_terms(R, h_tilde, C_n):
    C_n = np.asarray(C_n, dtype=float)
    c = np.diag(C_n).copy()
    if np.any(c <= 0):
        raise ValueError("noise covariance needs a positive diagonal")
    a = R @ h_tilde
    t = a / np.sqrt(0.5 * c)
    return a, c, t


def quantized_moments(R: np.ndarray, h_tilde: np.ndarray, C_n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of ``sign(R h~ + e) / sqrt(2)`` with ``e ~ N(0, C_n / 2)``.

    ``R`` holds the real-stacked regressor rows of one part (real or
    imaginary). Off-diagonal entries use the orthant probabilities of each
    pair of samples.
    """
    a, c, t = _moment_terms(R, h_tilde, C_n)
    mu = _SQRT_HALF * (1.0 - 2.0 * gaussian_tail(t))
    n = a.size
    k, m = np.triu_indices(n, 1)
    half = 0.5 * np.asarray(C_n, dtype=float)
    p_pp = orthant_prob(a[k], a[m], half[k, k], half[m, m], half[k, m])
    p_mm = orthant_prob(-a[k], -a[m], half[k, k], half[m, m], half[k, m])
    same = p_pp + p_mm
    # E[q_k q_n] = (same - (1 - same)) / 2
    off = (2.0 * same - 1.0) / 2.0 - mu[k] * mu[m]
    C = np.diag(0.5 - mu * mu)
    C[k, m] = off
    C[m, k] = off
    return mu, C


def quantized_mean_jacobian(R: np.ndarray, h_tilde: np.ndarray, C_n: np.ndarray) -> np.ndarray:
    """Jacobian of the quantized mean with respect to ``h~``."""
    a, c, _ = _moment_terms(R, h_tilde, C_n)
    scale = 2.0 * np.exp(-a * a / c) / np.sqrt(2.0 * np.pi * c)
    return scale[:, None] * R


def _stable_covariance(a, c, C_n):
    """Quantized covariance written in terms of sign-flip probabilities.

    With ``q_k`` the probability that sample k disagrees with the sign of its
    mean, ``var = 2 q (1 - q)`` and the off-diagonals are
    ``2 (P(both flip) - q_k q_n) s_k s_n``. Unlike ``1/2 - mu^2`` this keeps
    full relative accuracy when samples are nearly deterministic.
    """
    t = a / np.sqrt(0.5 * c)
    sg = np.where(t >= 0, 1.0, -1.0)
    ta = np.abs(t)
    q = ndtr(-ta)
    n = a.size
    k, m = np.triu_indices(n, 1)
    r = C_n[k, m] / np.sqrt(c[k] * c[m]) * sg[k] * sg[m]
    both = bvn_upper(ta[k], ta[m], np.clip(r, -1.0, 1.0))
    off = 2.0 * (both - q[k] * q[m]) * sg[k] * sg[m]
    C = np.diag(2.0 * q * (1.0 - q))
    C[k, m] = off
    C[m, k] = off
    return C


def moment_information(R: np.ndarray, h_tilde: np.ndarray, C_n: np.ndarray, var_floor: float = VAR_FLOOR) -> np.ndarray:
    """``D^T C^{-1} D`` for one part at a fixed channel."""
    C_n = np.asarray(C_n, dtype=float)
    a, c, t = _moment_terms(R, h_tilde, C_n)
    q = ndtr(-np.abs(t))
    keep = 2.0 * q * (1.0 - q) > var_floor
    if not keep.any():
        return np.zeros((R.shape[1], R.shape[1]))
    a, c, Rk = a[keep], c[keep], R[keep]
    Ck = C_n[np.ix_(keep, keep)]
    C = _stable_covariance(a, c, Ck)
    D = (2.0 * np.exp(-a * a / c) / np.sqrt(2.0 * np.pi * c))[:, None] * Rk
    L = HermitianFactor(C, "quantized sample covariance").lower
    Y = solve_triangular(L, D, lower=True)
    return Y.T @ Y


def _antenna_blocks(Phi: np.ndarray, rows_per_antenna: int):
    """Split Phi into per-antenna row blocks restricted to their nonzero columns."""
    n = Phi.shape[1]
    blocks = []
    for r0 in range(0, Phi.shape[0], rows_per_antenna):
        P = Phi[r0 : r0 + rows_per_antenna]
        cols = np.flatnonzero(np.any(P != 0, axis=0))
        idx = np.concatenate([cols, cols + n])
        Pc = P[:, cols]
        re = np.hstack([Pc.real, -Pc.imag])
        im = np.hstack([Pc.imag, Pc.real])
        blocks.append((idx, re, im))
    return blocks


def _moment_one(blocks, C_n, dim, h_tilde):
    J = np.zeros((dim, dim))
    for idx, re, im in blocks:
        hs = h_tilde[idx]
        Jb = moment_information(re, hs, C_n) + moment_information(im, hs, C_n)
        J[np.ix_(idx, idx)] += Jb
    return J


def bim_data_lower_oversampled(
    Phi: np.ndarray,
    C_n: np.ndarray,
    prior: ChannelPrior,
    n_channel_draws: int,
    rng: np.random.Generator,
    workers: int = 1,
) -> Bim:
    """Moment-based lower bound of the data BIM, averaged over channel draws.

    ``C_n`` is the per-antenna noise covariance. Noise is independent across
    antennas, so the quantized samples of different antennas are
    conditionally independent and the bound is a sum of per-antenna terms.
    """
    if n_channel_draws < 1:
        raise ValueError("n_channel_draws must be >= 1")
    C_n = np.asarray(C_n, dtype=float)
    if Phi.shape[0] % C_n.shape[0]:
        raise ValueError("Phi rows are not a multiple of the noise block size")
    blocks = _antenna_blocks(Phi, C_n.shape[0])
    draws = _draw_h_tilde(prior, n_channel_draws, rng)
    fn = partial(_moment_one, blocks, C_n, 2 * Phi.shape[1])
    samples = np.stack(ordered_map(fn, draws, workers))
    return _average(samples, "moment-lower-bound")


# ----------------------------------------------------------------- the CRB


def _as_matrix(J) -> np.ndarray:
    return J.J if isinstance(J, Bim) else np.asarray(J, dtype=float)


def crb_from_bim(J_D, J_P) -> CrbReport:
    """Invert ``J_D + J_P`` in the complex domain.

    The complex BIM is ``(J_RR + J_II) / 4 + j (J_RI - J_IR) / 4``.
    """
    J = _as_matrix(J_D) + _as_matrix(J_P)
    n = J.shape[0] // 2
    RR, RI = J[:n, :n], J[:n, n:]
    IR, II = J[n:, :n], J[n:, n:]
    Jc = 0.25 * (RR + II) + 0.25j * (RI - IR)
    Jc = 0.5 * (Jc + Jc.conj().T)
    inv = hermitian_solve(Jc, np.eye(n, dtype=complex), "Bayesian information matrix")
    bound = float(np.mean(np.real(np.diag(inv))))
    if not bound > 0:
        raise ValueError("non-positive bound; the BIM is not positive definite")
    return CrbReport(bound, Jc)


def crb_jackknife(bim: Bim, J_P) -> tuple[float, float]:
    """Bound and 95% jackknife half-width over the channel draws of ``bim``."""
    base = crb_from_bim(bim, J_P).per_coefficient_bound
    n = bim.n_draws
    if n < 2:
        return base, 0.0
    total = bim.samples.sum(axis=0)
    loo = np.array([crb_from_bim((total - s) / (n - 1), J_P).per_coefficient_bound for s in bim.samples])
    var = (n - 1) / n * np.sum((loo - loo.mean()) ** 2)
    return base, float(1.959963984540054 * np.sqrt(var))
