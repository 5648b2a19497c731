"""Kronecker-correlated Rayleigh fading."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CorrelationSettings",
    "ChannelPrior",
    "receive_correlation",
    "symmetric_sqrt",
    "sample_channel",
    "complex_normal",
]

_PSD_TOL = 1e-10


def symmetric_sqrt(r: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via the eigendecomposition."""
    w, v = np.linalg.eigh(r)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def receive_correlation(rho: float, n_r: int) -> tuple[np.ndarray, np.ndarray]:
    """Receive correlation ``R[i, j] = rho ** ((i - j) ** 2)`` and its square root.

    Raises:
        ValueError: if ``rho`` is outside [0, 1) or the matrix is not PSD.
    """
    if not (0.0 <= rho < 1.0):
        raise ValueError(f"rho must lie in [0, 1), got {rho}")
    if n_r < 1:
        raise ValueError("n_r must be >= 1")
    d = np.subtract.outer(np.arange(n_r), np.arange(n_r)) ** 2
    r = np.power(float(rho), d)  # 0.0 ** 0 == 1.0, so rho = 0 gives the identity
    lam_min = np.linalg.eigvalsh(r)[0]
    if lam_min < -_PSD_TOL:
        raise ValueError(f"receive correlation is not PSD (min eigenvalue {lam_min:.3e})")
    return r, symmetric_sqrt(r)


@dataclass(frozen=True)
class CorrelationSettings:
    rho: float
    n_r: int
    n_t: int

    def __post_init__(self):
        receive_correlation(self.rho, self.n_r)  # validates
        if self.n_t < 1:
            raise ValueError("n_t must be >= 1")


@dataclass(frozen=True)
class ChannelPrior:
    """Prior of ``vec(H')`` (column-major, index ``t * N_r + r``).

    Attributes:
        R_r, R_t: receive and transmit correlation matrices.
        R_r_sqrt, R_t_sqrt: their symmetric square roots.
        C_hp: ``R_t^T kron R_r``.
    """

    R_r: np.ndarray
    R_t: np.ndarray
    R_r_sqrt: np.ndarray
    R_t_sqrt: np.ndarray
    C_hp: np.ndarray

    @classmethod
    def kronecker(cls, rho: float, n_r: int, n_t: int, R_t: np.ndarray | None = None) -> "ChannelPrior":
        R_r, R_r_sqrt = receive_correlation(rho, n_r)
        if R_t is None:
            R_t = np.eye(n_t)
        R_t = np.asarray(R_t)
        if R_t.shape != (n_t, n_t):
            raise ValueError("R_t has the wrong shape")
        C = np.kron(R_t.T, R_r)
        return cls(R_r, R_t, R_r_sqrt, symmetric_sqrt(R_t), C)

    @classmethod
    def from_settings(cls, settings: CorrelationSettings) -> "ChannelPrior":
        return cls.kronecker(settings.rho, settings.n_r, settings.n_t)

    @property
    def n_r(self) -> int:
        return self.R_r.shape[0]

    @property
    def n_t(self) -> int:
        return self.R_t.shape[0]

    @property
    def size(self) -> int:
        return self.n_r * self.n_t


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circular CN(0, 1) samples (variance 1/2 per real component)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def sample_channel(prior: ChannelPrior, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    """Draw ``H' = R_r^{1/2} H_w R_t^{1/2}``.

    Returns an ``N_r x N_t`` matrix, or a stack ``count x N_r x N_t``.
    """
    shape = (prior.n_r, prior.n_t) if count is None else (count, prior.n_r, prior.n_t)
    h_w = complex_normal(rng, shape)
    return prior.R_r_sqrt @ h_w @ prior.R_t_sqrt
