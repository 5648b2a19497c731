"""Pulse shaping taps and the structured matrices of the oversampled receiver.

Time is measured in symbol periods (T = 1). A tap vector sampled with
``oversampling`` samples per symbol over [-N T, N T] has ``2 * oversampling * N + 1``
entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import toeplitz

__all__ = [
    "FilterTaps",
    "Upsampler",
    "PulseBank",
    "rrc_taps",
    "impulse_taps",
    "alias_free_factor",
    "build_g_matrix",
    "build_z_matrix",
    "build_upsampler",
]

# distance (in units of t/T) below which the closed form is replaced by its limit
_SINGULAR_TOL = 1e-8


@dataclass(frozen=True)
class FilterTaps:
    """Samples of a pulse on a uniform grid centred at t = 0.

    Attributes:
        taps: real vector of length ``2 * oversampling * half_span + 1``.
        oversampling: samples per symbol period of the tap grid.
        half_span: N, the one-sided support in symbol periods.
    """

    taps: np.ndarray
    oversampling: int
    half_span: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=float)
        if taps.ndim != 1:
            raise ValueError("taps must be a 1-D vector")
        expected = 2 * self.oversampling * self.half_span + 1
        if taps.size != expected:
            raise ValueError(f"expected {expected} taps, got {taps.size}")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def sample_spacing(self) -> float:
        return 1.0 / self.oversampling

    @property
    def center_index(self) -> int:
        return self.oversampling * self.half_span

    @property
    def energy(self) -> float:
        return float(np.dot(self.taps, self.taps))


def _rrc_value(t: float, beta: float) -> float:
    if abs(t) < _SINGULAR_TOL:
        return 1.0 - beta + 4.0 * beta / math.pi
    if abs(abs(4.0 * beta * t) - 1.0) < _SINGULAR_TOL:
        a = math.pi / (4.0 * beta)
        return beta / math.sqrt(2.0) * (
            (1.0 + 2.0 / math.pi) * math.sin(a) + (1.0 - 2.0 / math.pi) * math.cos(a)
        )
    num = math.sin(math.pi * t * (1.0 - beta)) + 4.0 * beta * t * math.cos(math.pi * t * (1.0 + beta))
    den = math.pi * t * (1.0 - (4.0 * beta * t) ** 2)
    return num / den


def rrc_taps(roll_off: float, half_span_symbols: int, oversampling: int) -> FilterTaps:
    """Unit-energy root-raised-cosine taps on [-N T, N T] at spacing T / M.

    The removable singularities at t = 0 and |t| = T / (4 beta) use their
    analytic limits.
    """
    if not (0.0 < roll_off <= 1.0):
        raise ValueError(f"roll_off must lie in (0, 1], got {roll_off}")
    if half_span_symbols < 1 or oversampling < 1:
        raise ValueError("half_span_symbols and oversampling must be >= 1")
    m = oversampling
    n = half_span_symbols
    k = np.arange(-m * n, m * n + 1)
    taps = np.array([_rrc_value(kk / m, roll_off) for kk in k])
    taps /= np.linalg.norm(taps)
    return FilterTaps(taps, m, n)


def impulse_taps(half_span_symbols: int, oversampling: int) -> FilterTaps:
    """Delta pulse: a single unit tap at t = 0."""
    taps = np.zeros(2 * oversampling * half_span_symbols + 1)
    taps[oversampling * half_span_symbols] = 1.0
    return FilterTaps(taps, oversampling, half_span_symbols)


def alias_free_factor(roll_off: float, oversampling: int) -> int:
    """Smallest tap-grid refinement L such that sampling at rate M L / T does not
    alias the raised-cosine autocorrelation (bandwidth (1 + beta) / T)."""
    return max(1, math.ceil((1.0 + roll_off) / oversampling - 1e-12))


def build_g_matrix(m_taps: FilterTaps, decimation: int = 1) -> np.ndarray:
    """Toeplitz noise-filter matrix.

    Row ``r`` holds the full tap vector starting at column ``r * decimation``.
    With ``decimation == 1`` this is the MN x 3MN matrix whose rows are
    successive one-sample shifts of the matched filter. A larger decimation
    models white noise on a grid ``decimation`` times finer than the output.
    """
    if decimation < 1 or m_taps.oversampling % decimation:
        raise ValueError("decimation must divide the tap oversampling")
    m_out = m_taps.oversampling // decimation
    n = m_taps.half_span
    rows = m_out * n
    cols = 3 * m_taps.oversampling * n
    g = np.zeros((rows, cols))
    taps = m_taps.taps
    for r in range(rows):
        start = r * decimation
        g[r, start : start + taps.size] = taps
    return g


def build_z_matrix(p_taps: FilterTaps, m_taps: FilterTaps, decimation: int = 1) -> np.ndarray:
    """Toeplitz matrix of the combined response z = p * m sampled at T / M.

    ``Z[i, j] = z((j - i) T / M)`` with z normalised so that z(0) = 1.
    """
    if p_taps.oversampling != m_taps.oversampling or p_taps.half_span != m_taps.half_span:
        raise ValueError("pulse and matched filter taps must share N and M")
    if decimation < 1 or m_taps.oversampling % decimation:
        raise ValueError("decimation must divide the tap oversampling")
    z = np.convolve(p_taps.taps, m_taps.taps)
    centre = z.size // 2
    size = (m_taps.oversampling // decimation) * m_taps.half_span
    pos = z[centre :: decimation][:size]
    neg = z[centre :: -decimation][:size]
    return toeplitz(neg, pos) / z[centre]


@dataclass(frozen=True)
class Upsampler:
    """The map ``I_n kron u`` with ``u = [0, ..., 0, 1]^T`` of length M."""

    n_in: int
    factor: int

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Upsample along the last axis."""
        v = np.asarray(v)
        if v.shape[-1] != self.n_in:
            raise ValueError(f"expected last axis of length {self.n_in}")
        out = np.zeros(v.shape[:-1] + (self.n_in * self.factor,), dtype=v.dtype)
        out[..., self.factor - 1 :: self.factor] = v
        return out

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y)[..., self.factor - 1 :: self.factor]

    @property
    def u(self) -> np.ndarray:
        u = np.zeros(self.factor)
        u[-1] = 1.0
        return u

    def to_dense(self) -> np.ndarray:
        return np.kron(np.eye(self.n_in), self.u[:, None])


def build_upsampler(n_in: int, oversampling: int) -> Upsampler:
    if n_in < 1 or oversampling < 1:
        raise ValueError("arguments must be >= 1")
    return Upsampler(n_in, oversampling)


@dataclass(frozen=True)
class PulseBank:
    """Matched RRC transmit/receive pulses and the derived G, Z and u.

    Taps are generated on a grid refined by :func:`alias_free_factor`, so Z and
    G G^T are free of aliasing also at M = 1, where the noise is white and the
    symbol-spaced pulse is Nyquist.
    """

    roll_off: float
    block_len: int
    oversampling: int
    grid_factor: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "grid_factor", alias_free_factor(self.roll_off, self.oversampling))

    @cached_property
    def taps(self) -> FilterTaps:
        return rrc_taps(self.roll_off, self.block_len, self.oversampling * self.grid_factor)

    @cached_property
    def G(self) -> np.ndarray:
        return build_g_matrix(self.taps, self.grid_factor)

    @cached_property
    def Z(self) -> np.ndarray:
        return build_z_matrix(self.taps, self.taps, self.grid_factor)

    @cached_property
    def u(self) -> np.ndarray:
        return build_upsampler(1, self.oversampling).u

    @cached_property
    def pulse_matrix(self) -> np.ndarray:
        """Z (I_N kron u): maps N symbols to the MN filtered samples."""
        return self.Z[:, self.oversampling - 1 :: self.oversampling]

    @cached_property
    def noise_cov(self) -> np.ndarray:
        """G G^T, the per-antenna covariance of unit-variance filtered noise."""
        return self.G @ self.G.T
