"""QPSK mapping and the sliding-window Bussgang LMMSE detector."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_solve
from .quantization import arcsin_covariance, bussgang_operator
from .signal import PulseBank

__all__ = [
    "QPSK_POINTS",
    "DetectionConfig",
    "SlidingWindowDetector",
    "qpsk_mod",
    "qpsk_demod",
    "qpsk_from_index",
    "qpsk_slice",
    "sliding_window_detect",
    "ser",
    "wilson_half_width",
]

# Gray map: index 2 b0 + b1 -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2)
QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2)
Z95 = 1.959963984540054


def qpsk_mod(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % 2:
        raise ValueError("QPSK needs an even number of bits")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    b = bits.reshape(-1, 2)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2)


def qpsk_demod(symbols) -> np.ndarray:
    s = np.asarray(symbols).ravel()
    return np.stack([s.real < 0, s.imag < 0], axis=1).astype(np.int64).ravel()


def qpsk_from_index(idx) -> np.ndarray:
    return QPSK_POINTS[np.asarray(idx)]


def qpsk_slice(x) -> np.ndarray:
    """Index of the nearest QPSK point (ties go to the positive half-plane)."""
    x = np.asarray(x)
    return 2 * (x.real < 0) + (x.imag < 0)


@dataclass(frozen=True)
class DetectionConfig:
    window_len_symbols: int = 3
    data_block_len: int = 100

    def __post_init__(self):
        if self.window_len_symbols < 1 or self.window_len_symbols % 2 == 0:
            raise ValueError("window length must be a positive odd integer")
        if self.data_block_len < 1:
            raise ValueError("data block length must be >= 1")


class SlidingWindowDetector:
    """Per-symbol LMMSE detection from a window of oversampled samples.

    The window around symbol n covers the samples of symbols ``n - w .. n + w``
    (clipped at the block edges). Every symbol of the block, including those
    outside the window, contributes to the window covariance through the
    tails of Z, so out-of-window interference is treated as coloured noise.
    Windows whose local statistics coincide share one filter.

    Args:
        bank: pulse bank built with ``N = data_block_len``.
        sigma_n2: noise variance.
        cfg: detection configuration.
        quantized: if False the plain LMMSE filter for unquantized samples
            is used instead of the Bussgang-linearized one.
    """

    def __init__(self, bank: PulseBank, sigma_n2: float, cfg: DetectionConfig = DetectionConfig(), quantized: bool = True):
        if bank.block_len != cfg.data_block_len:
            raise ValueError("pulse bank and detection config disagree on the block length")
        self.bank = bank
        self.sigma_n2 = float(sigma_n2)
        self.cfg = cfg
        self.quantized = quantized
        M, N = bank.oversampling, bank.block_len
        self.ZS = bank.pulse_matrix
        self.K = self.ZS @ self.ZS.T
        self.Cn = bank.noise_cov
        half = cfg.window_len_symbols // 2
        windows = []
        for n in range(N):
            lo, hi = max(0, n - half), min(N, n + half + 1)
            windows.append((np.arange(lo * M, hi * M), n, n - lo))
        self.groups = self._group(windows)

    def _local(self, rows, n):
        return self.K[np.ix_(rows, rows)], self.Cn[np.ix_(rows, rows)], self.ZS[rows, n]

    def _group(self, windows):
        groups: list[tuple[tuple, list]] = []
        for rows, n, c in windows:
            stats = self._local(rows, n)
            for rep, members in groups:
                if rep[0].size == rows.size and rep[2] == c and all(
                    np.max(np.abs(x - y)) < 1e-9 for x, y in zip(rep[1], stats)
                ):
                    members.append((rows, n))
                    break
            else:
                groups.append(((rows, stats, c), [(rows, n)]))
        return groups

    def _filter(self, H, HH, stats):
        K_w, Cn_w, z_col = stats
        n_r = H.shape[0]
        C_y = np.kron(HH, K_w) + self.sigma_n2 * np.kron(np.eye(n_r), Cn_w)
        C_y = 0.5 * (C_y + C_y.conj().T)
        H_c = np.kron(H, z_col[:, None])  # response of the centre symbols
        if self.quantized:
            A = bussgang_operator(C_y)
            return hermitian_solve(arcsin_covariance(C_y), A[:, None] * H_c, "window covariance").conj().T
        return hermitian_solve(C_y, H_c, "window covariance").conj().T

    def equalize(self, y: np.ndarray, H: np.ndarray) -> np.ndarray:
        """Soft estimates ``N_t x N`` from received samples ``N_r x M N``."""
        H = np.asarray(H)
        y = np.asarray(y).reshape(H.shape[0], -1)
        HH = H @ H.conj().T
        out = np.empty((H.shape[1], self.bank.block_len), dtype=complex)
        for (rows, stats, _), members in self.groups:
            W = self._filter(H, HH, stats)
            idx = np.array([m[0] for m in members])  # windows x len(rows)
            Y = y[:, idx].transpose(1, 0, 2).reshape(len(members), -1)
            out[:, [m[1] for m in members]] = (Y @ W.T).T
        return out

    def detect(self, y: np.ndarray, H: np.ndarray) -> np.ndarray:
        """QPSK index decisions ``N_t x N``."""
        return qpsk_slice(self.equalize(y, H))


def sliding_window_detect(yq_data, H, sigma_n2, bank: PulseBank, cfg: DetectionConfig = DetectionConfig(), quantized=True):
    return SlidingWindowDetector(bank, sigma_n2, cfg, quantized).detect(yq_data, H)


def wilson_half_width(errors: int, total: int, z: float = Z95) -> float:
    if total <= 0:
        raise ValueError("need at least one symbol")
    p = errors / total
    denom = 1.0 + z * z / total
    return float(z / denom * np.sqrt(p * (1 - p) / total + z * z / (4.0 * total * total)))


def ser(decisions, truth) -> tuple[float, float]:
    """Symbol error rate and its 95% Wilson half-width."""
    d = np.asarray(decisions).ravel()
    t = np.asarray(truth).ravel()
    if d.shape != t.shape:
        raise ValueError("decision and truth lengths differ")
    if d.size == 0:
        raise ValueError("empty input")
    errors = int(np.count_nonzero(d != t))
    return errors / d.size, wilson_half_width(errors, d.size)
