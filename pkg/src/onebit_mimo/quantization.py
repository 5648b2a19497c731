"""One-bit quantizer and second-order statistics of sign-quantized Gaussians."""
from __future__ import annotations

import numpy as np

__all__ = [
    "quantize_1bit",
    "pilot_covariance",
    "bussgang_operator",
    "arcsin_covariance",
]

_SQRT_HALF = 1.0 / np.sqrt(2.0)
_CLIP_TOL = 1e-9


def quantize_1bit(y: np.ndarray) -> np.ndarray:
    """Sign of real and imaginary parts scaled by 1/sqrt(2); sign(0) = +1."""
    y = np.asarray(y)
    re = np.where(y.real >= 0, _SQRT_HALF, -_SQRT_HALF)
    im = np.where(y.imag >= 0, _SQRT_HALF, -_SQRT_HALF)
    return re + 1j * im


def pilot_covariance(Phi: np.ndarray, C_hp: np.ndarray, sigma_n2: float, G: np.ndarray) -> np.ndarray:
    """``Phi C_h' Phi^H + sigma_n2 (I_{N_r} kron G G^T)``.

    The number of receive antennas is inferred from the row counts of
    ``Phi`` and ``G``.
    """
    rows = Phi.shape[0]
    if rows % G.shape[0] or Phi.shape[1] != C_hp.shape[0]:
        raise ValueError("inconsistent dimensions")
    n_r = rows // G.shape[0]
    noise = np.kron(np.eye(n_r), G @ G.T)
    C = Phi @ C_hp @ Phi.conj().T + sigma_n2 * noise
    return 0.5 * (C + C.conj().T)


def bussgang_operator(C_y: np.ndarray) -> np.ndarray:
    """Diagonal of ``A = sqrt(2/pi) diag(C_y)^{-1/2}``, returned as a vector."""
    d = np.real(np.diag(C_y))
    if np.any(d <= 0):
        raise ValueError("covariance has a nonpositive diagonal entry")
    return np.sqrt(2.0 / np.pi) / np.sqrt(d)


def _asin_checked(x: np.ndarray) -> np.ndarray:
    excess = np.abs(x) - 1.0
    if np.any(excess > _CLIP_TOL):
        raise ValueError(f"normalized covariance entry exceeds 1 by {excess.max():.3e}")
    return np.arcsin(np.clip(x, -1.0, 1.0))


def arcsin_covariance(C_s: np.ndarray) -> np.ndarray:
    """Covariance of ``quantize_1bit(s)`` for ``s ~ CN(0, C_s)``.

    ``(2/pi) [asin(K C_R K) + j asin(K C_I K)]`` with ``K = diag(C_s)^{-1/2}``.
    """
    d = np.real(np.diag(C_s))
    if np.any(d <= 0):
        raise ValueError("covariance has a nonpositive diagonal entry")
    k = 1.0 / np.sqrt(d)
    N = C_s * np.outer(k, k)
    re = _asin_checked(N.real)
    np.fill_diagonal(re, np.pi / 2)
    out = (2.0 / np.pi) * re
    if np.iscomplexobj(C_s):
        im = _asin_checked(N.imag)
        np.fill_diagonal(im, 0.0)
        out = out + 1j * (2.0 / np.pi) * im
    return out
