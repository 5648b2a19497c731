"""Pilot design, the equivalent transmit matrix and the received-signal model.

Stacking conventions used throughout the package:

* received vectors are antenna-major, sample ``i`` of antenna ``r`` sits at
  ``r * (M * n_sym) + i``;
* ``h' = vec(H')`` is column-major, entry ``(r, t)`` sits at ``t * N_r + r``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .channel import ChannelPrior, complex_normal
from .signal import PulseBank

__all__ = [
    "QPSK_ROTATION",
    "PilotModel",
    "snr_to_noise_var",
    "make_pilots",
    "received_signal",
    "build_phi",
    "synth_noise",
    "real_stack",
    "complex_unstack",
    "real_stack_matrix",
    "build_pilot_model",
]

log = logging.getLogger(__name__)

# maps the unit alphabet {1, j, -1, -j} onto the QPSK points (+-1 +- j)/sqrt(2)
QPSK_ROTATION = (1 + 1j) / np.sqrt(2)
_UNITS = np.array([1, 1j, -1, -1j])


def snr_to_noise_var(snr_db, n_t: int):
    """Invert SNR = 10 log10(N_t / sigma_n^2)."""
    return n_t * 10.0 ** (-np.asarray(snr_db, dtype=float) / 10.0)


def _orthogonal_unit_search(n_t, tau, rng, max_iter):
    """Local search over {1, j, -1, -j} for exactly orthogonal columns.

    Column ``k`` is adjusted with the earlier columns held fixed. Single- and
    two-entry changes are accepted whenever they do not increase the squared
    inner products with earlier columns; sideways moves let the walk escape
    plateaus where no single change helps.
    """
    x = _UNITS[rng.integers(0, 4, (tau, n_t))]
    for k in range(1, n_t):
        g = x[:, :k].conj().T @ x[:, k]
        cost = float(np.sum(np.abs(g) ** 2))
        it = 0
        while cost > 1e-9:
            it += 1
            if it > max_iter:
                return None
            if rng.random() < 0.5:
                i = rng.integers(tau)
                a = _UNITS[rng.integers(4)]
                g2 = g + x[i, :k].conj() * (a - x[i, k])
                c2 = float(np.sum(np.abs(g2) ** 2))
                if c2 <= cost:
                    x[i, k] = a
                    g, cost = g2, c2
            else:
                i, j = rng.choice(tau, 2, replace=False)
                a, b = _UNITS[rng.integers(0, 4, 2)]
                g2 = g + x[i, :k].conj() * (a - x[i, k]) + x[j, :k].conj() * (b - x[j, k])
                c2 = float(np.sum(np.abs(g2) ** 2))
                if c2 <= cost:
                    x[i, k], x[j, k] = a, b
                    g, cost = g2, c2
    return x


def make_pilots(n_t: int, tau: int, rng: np.random.Generator, max_iter: int = 200_000) -> np.ndarray:
    """Random QPSK pilots with exactly orthogonal columns (``X^H X = tau I``).

    Two QPSK sequences of odd length can never be orthogonal, so for odd
    ``tau`` (or if the search stalls) the pilots fall back to randomly chosen
    DFT columns with random QPSK row phases. Those are unit modulus and
    orthogonal but not drawn from the QPSK alphabet.
    """
    if n_t < 1:
        raise ValueError("n_t must be >= 1")
    if tau < n_t:
        raise ValueError(f"tau={tau} must be >= n_t={n_t}")
    x = None
    if n_t == 1 or tau % 2 == 0:
        x = _orthogonal_unit_search(n_t, tau, rng, max_iter)
        if x is None:
            log.warning("QPSK pilot search stalled for tau=%d; using DFT columns", tau)
    if x is None:
        freqs = rng.choice(tau, n_t, replace=False)
        f = np.exp(2j * np.pi * np.outer(np.arange(tau), freqs) / tau)
        x = _UNITS[rng.integers(0, 4, tau)][:, None] * f
    return QPSK_ROTATION * x


def received_signal(H: np.ndarray, symbols: np.ndarray, Z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Noiseless filtered samples ``(I kron Z) U (H kron I) x``.

    Args:
        H: ``N_r x N_t`` channel.
        symbols: ``n_sym x N_t`` transmitted symbols (one column per user).
        Z: ``M n_sym`` square pulse matrix.
        u: upsampling vector of length M.

    Returns:
        Antenna-major vector of length ``N_r * M * n_sym``.
    """
    m = len(u)
    n_sym = symbols.shape[0]
    if Z.shape != (m * n_sym, m * n_sym) or H.shape[1] != symbols.shape[1]:
        raise ValueError("inconsistent dimensions")
    s = H @ symbols.T  # N_r x n_sym
    up = np.zeros((H.shape[0], m * n_sym), dtype=complex)
    up[:, m - 1 :: m] = s * u[-1]
    return (up @ Z.T).reshape(-1)


def build_phi(pilots: np.ndarray, Z: np.ndarray, u: np.ndarray, n_r: int, M: int | None = None) -> np.ndarray:
    """Equivalent transmit matrix: column ``q`` is the response to channel ``e_q``."""
    pilots = np.atleast_2d(np.asarray(pilots))
    if M is not None and M != len(u):
        raise ValueError("M does not match the upsampling vector")
    n_t = pilots.shape[1]
    phi = np.empty((n_r * Z.shape[0], n_r * n_t), dtype=complex)
    for t in range(n_t):
        for r in range(n_r):
            E = np.zeros((n_r, n_t))
            E[r, t] = 1.0
            phi[:, t * n_r + r] = received_signal(E, pilots, Z, u)
    return phi


def synth_noise(sigma_n2: float, G: np.ndarray, n_r: int, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Filtered noise ``(I_{N_r} kron G) w`` with ``w ~ CN(0, sigma_n2 I)``.

    Returns an antenna-major vector, or ``count`` such vectors as rows.
    """
    lead = () if count is None else (count,)
    w = complex_normal(rng, lead + (n_r, G.shape[1]))
    n = np.sqrt(sigma_n2) * (w @ G.T)
    return n.reshape(lead + (-1,))


def real_stack(v: np.ndarray) -> np.ndarray:
    """``[Re v; Im v]`` along the last axis."""
    v = np.asarray(v)
    return np.concatenate([v.real, v.imag], axis=-1)


def complex_unstack(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    n = v.shape[-1]
    if n % 2:
        raise ValueError("real-stacked vector must have even length")
    return v[..., : n // 2] + 1j * v[..., n // 2 :]


def real_stack_matrix(A: np.ndarray) -> np.ndarray:
    """Real representation ``[[A_R, -A_I], [A_I, A_R]]``."""
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


@dataclass(frozen=True)
class PilotModel:
    """Everything the pilot phase of one configuration needs.

    Attributes:
        pilots: ``tau x N_t`` pilot symbols.
        B: ``M tau x N_t`` per-antenna response ``Z (I kron u) pilots``.
        Phi: ``N_r M tau x N_r N_t`` equivalent transmit matrix.
        C_n: per-antenna noise covariance ``sigma_n2 G G^T``.
        sigma_n2: noise variance.
        bank: the pulse bank built with ``N = tau``.
    """

    pilots: np.ndarray
    B: np.ndarray
    Phi: np.ndarray
    C_n: np.ndarray
    sigma_n2: float
    bank: PulseBank

    @property
    def n_r(self) -> int:
        return self.Phi.shape[1] // self.pilots.shape[1]

    def full_noise_cov(self) -> np.ndarray:
        return np.kron(np.eye(self.n_r), self.C_n)

    def observe(self, H: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Unquantized received pilot vector for channel ``H``."""
        y = received_signal(H, self.pilots, self.bank.Z, self.bank.u)
        return y + synth_noise(self.sigma_n2, self.bank.G, H.shape[0], rng)


def build_pilot_model(
    prior: ChannelPrior, tau: int, oversampling: int, roll_off: float, sigma_n2: float, rng: np.random.Generator
) -> PilotModel:
    bank = PulseBank(roll_off, tau, oversampling)
    pilots = make_pilots(prior.n_t, tau, rng)
    phi = build_phi(pilots, bank.Z, bank.u, prior.n_r)
    B = bank.pulse_matrix @ pilots
    return PilotModel(pilots, B, phi, sigma_n2 * bank.noise_cov, float(sigma_n2), bank)
