"""Cholesky solves with a single, bounded ridge escalation."""
from __future__ import annotations

import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

__all__ = ["NumericalError", "HermitianFactor", "hermitian_solve", "RIDGE_SCALE"]

log = logging.getLogger(__name__)

RIDGE_SCALE = 1e-10


class NumericalError(RuntimeError):
    """A factorization failed even after the permitted regularization."""


class HermitianFactor:
    """Cholesky factor of a Hermitian positive definite matrix.

    If the plain factorization fails, ``RIDGE_SCALE * trace / dim`` is added to
    the diagonal once. A second failure raises :class:`NumericalError`.
    """

    def __init__(self, A: np.ndarray, what: str = "matrix"):
        A = np.asarray(A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"{what} must be square")
        self.ridge = 0.0
        try:
            self._cf = cho_factor(A, lower=True, check_finite=True)
        except LinAlgError:
            self.ridge = RIDGE_SCALE * float(np.real(np.trace(A))) / A.shape[0]
            log.debug("%s not positive definite; adding ridge %.3e", what, self.ridge)
            try:
                self._cf = cho_factor(A + self.ridge * np.eye(A.shape[0]), lower=True)
            except LinAlgError as exc:
                raise NumericalError(f"{what} is singular beyond the ridge budget") from exc
        except ValueError as exc:  # non-finite input
            raise NumericalError(f"{what} contains non-finite entries") from exc

    @property
    def lower(self) -> np.ndarray:
        return np.tril(self._cf[0])

    def solve(self, B: np.ndarray) -> np.ndarray:
        return cho_solve(self._cf, B)


def hermitian_solve(A: np.ndarray, B: np.ndarray, what: str = "matrix") -> np.ndarray:
    """Solve ``A X = B`` for Hermitian positive definite ``A``."""
    return HermitianFactor(A, what).solve(B)
