"""Linear channel estimators for quantized and unquantized pilots."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import hermitian_solve
from .quantization import arcsin_covariance, bussgang_operator, pilot_covariance

__all__ = [
    "LraLmmse",
    "UnquantizedLmmse",
    "EstimateReport",
    "lra_lmmse_estimate",
    "lmmse_unquantized",
    "normalized_mse",
    "mse_summary",
]

Z95 = 1.959963984540054


class LraLmmse:
    """Low-resolution-aware LMMSE estimator for one pilot configuration.

    All statistics are analytic, so the filter ``W = C_h' Phi~^H C_yQ^{-1}`` is
    computed once at construction and afterwards applied to any number of
    quantized observations.

    Args:
        Phi: equivalent transmit matrix.
        C_hp: prior covariance of ``vec(H')``.
        sigma_n2: noise variance.
        G: noise filter matrix of the pilot window.
    """

    def __init__(self, Phi: np.ndarray, C_hp: np.ndarray, sigma_n2: float, G: np.ndarray):
        self.C_hp = np.asarray(C_hp)
        self.C_y = pilot_covariance(Phi, self.C_hp, sigma_n2, G)
        self.A = bussgang_operator(self.C_y)
        self.Phi_eff = self.A[:, None] * Phi
        self.C_yq = arcsin_covariance(self.C_y)
        # C_yq and C_h' are Hermitian, so W^H = C_yq^{-1} Phi~ C_h'
        self.W = hermitian_solve(self.C_yq, self.Phi_eff @ self.C_hp, "quantized pilot covariance").conj().T

    def __call__(self, yq: np.ndarray) -> np.ndarray:
        """Estimate ``h'`` from one observation or a stack of row observations."""
        return np.asarray(yq) @ self.W.T

    def predicted_mse(self) -> float:
        """Per-coefficient Bayesian MSE implied by the Bussgang statistics."""
        err = self.C_hp - self.W @ self.Phi_eff @ self.C_hp
        return float(np.real(np.trace(err))) / self.C_hp.shape[0]


class UnquantizedLmmse:
    """Standard LMMSE estimator ``C_h' Phi^H (Phi C_h' Phi^H + C_n)^{-1}``."""

    def __init__(self, Phi: np.ndarray, C_hp: np.ndarray, C_n: np.ndarray):
        self.C_hp = np.asarray(C_hp)
        self.Phi = Phi
        C_y = Phi @ self.C_hp @ Phi.conj().T + C_n
        C_y = 0.5 * (C_y + C_y.conj().T)
        self.W = hermitian_solve(C_y, Phi @ self.C_hp, "pilot covariance").conj().T

    def __call__(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y) @ self.W.T

    def predicted_mse(self) -> float:
        err = self.C_hp - self.W @ self.Phi @ self.C_hp
        return float(np.real(np.trace(err))) / self.C_hp.shape[0]


def lra_lmmse_estimate(yq, Phi, C_hp, sigma_n2, G) -> np.ndarray:
    return LraLmmse(Phi, C_hp, sigma_n2, G)(yq)


def lmmse_unquantized(y, Phi, C_hp, C_n) -> np.ndarray:
    return UnquantizedLmmse(Phi, C_hp, C_n)(y)


@dataclass(frozen=True)
class EstimateReport:
    h_hat: np.ndarray
    per_trial_se: float
    fingerprint: str = ""

    @classmethod
    def from_truth(cls, h_hat, h_true, fingerprint: str = "") -> "EstimateReport":
        se = float(np.sum(np.abs(np.asarray(h_hat) - np.asarray(h_true)) ** 2))
        return cls(np.asarray(h_hat), se, fingerprint)


def mse_summary(per_trial_se, n_coeff: int) -> tuple[float, float]:
    """Mean and 95% normal-approximation half-width of ``se / n_coeff``.

    With a single trial the half-width is undefined and reported as 0.
    """
    v = np.asarray(per_trial_se, dtype=float) / n_coeff
    if v.size == 0:
        raise ValueError("need at least one trial")
    mean = float(np.sum(v) / v.size)
    if v.size == 1:
        return mean, 0.0
    return mean, float(Z95 * np.std(v, ddof=1) / np.sqrt(v.size))


def normalized_mse(estimates, truths) -> tuple[float, float]:
    """Per-coefficient MSE over trials (rows) and its 95% half-width."""
    est = np.atleast_2d(np.asarray(estimates))
    tru = np.atleast_2d(np.asarray(truths))
    if est.shape != tru.shape:
        raise ValueError("estimates and truths differ in shape")
    if est.shape[0] == 0:
        raise ValueError("need at least one trial")
    se = np.sum(np.abs(est - tru) ** 2, axis=1)
    return mse_summary(se, est.shape[1])
