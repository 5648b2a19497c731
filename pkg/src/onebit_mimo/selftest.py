"""Fast oracle checks runnable from the command line."""
from __future__ import annotations

import tempfile
from pathlib import Path
from typing import Callable

import numpy as np

from .bounds import fisher_m1, quantized_mean_jacobian, quantized_moments
from .channel import ChannelPrior
from .harness import CurveRecord, emit_csv, emit_json, read_csv, read_json
from .orthant import orthant_prob
from .quantization import arcsin_covariance, quantize_1bit
from .signal import PulseBank, build_g_matrix, rrc_taps
from .system import build_phi, make_pilots, received_signal

__all__ = ["CHECKS", "run_selftest"]


def _check_taps():
    t = rrc_taps(0.8, 4, 2)
    assert np.allclose(t.taps, t.taps[::-1], rtol=0, atol=0)
    assert abs(t.energy - 1) < 1e-12
    G = build_g_matrix(rrc_taps(0.8, 4, 3))
    assert np.allclose(np.diag(G @ G.T), 1, atol=1e-12)


def _check_orthant():
    for r in (-0.9, -0.3, 0.0, 0.5, 0.95):
        ref = 0.25 + np.arcsin(r) / (2 * np.pi)
        assert abs(orthant_prob(0, 0, 1, 1, r) - ref) < 1e-12


def _check_arcsin():
    rng = np.random.default_rng(1)
    c = 0.3 + 0.4j
    C = np.array([[1, c], [np.conj(c), 1]])
    L = np.linalg.cholesky(C)
    n = 200_000
    s = L @ ((rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n))) / np.sqrt(2))
    q = quantize_1bit(s)
    emp = q[0] @ q[1].conj() / n
    assert abs(emp - arcsin_covariance(C)[0, 1]) < 0.01


def _check_phi():
    rng = np.random.default_rng(2)
    bank = PulseBank(0.8, 3, 2)
    X = make_pilots(2, 3, rng)
    phi = build_phi(X, bank.Z, bank.u, 2)
    H = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    direct = received_signal(H, X, bank.Z, bank.u)
    assert np.max(np.abs(phi @ H.reshape(-1, order="F") - direct)) < 1e-10


def _check_derivatives():
    rng = np.random.default_rng(3)
    R = rng.standard_normal((6, 4))
    h = rng.standard_normal(4)
    C = np.eye(6) + 0.3 * np.diag(np.ones(5), 1) + 0.3 * np.diag(np.ones(5), -1)
    D = quantized_mean_jacobian(R, h, C)
    eps = 1e-6
    fd = np.column_stack([
        (quantized_moments(R, h + eps * e, C)[0] - quantized_moments(R, h - eps * e, C)[0]) / (2 * eps)
        for e in np.eye(4)
    ])
    assert np.max(np.abs(fd - D)) < 1e-5 * np.max(np.abs(D))
    J = fisher_m1(R, h, 0.7)
    assert np.all(np.linalg.eigvalsh(J) > -1e-12)


def _check_roundtrip():
    recs = [CurveRecord("snr_db", 10.0, 2, 0.0, "mse", "lra-lmmse", 0.1 / 3, 1e-3 / 7, 2000, 7)]
    with tempfile.TemporaryDirectory() as d:
        emit_csv(recs, Path(d) / "a.csv")
        emit_json(recs, Path(d) / "a.json")
        assert read_csv(Path(d) / "a.csv") == recs
        assert read_json(Path(d) / "a.json") == recs


def _check_prior():
    p = ChannelPrior.kronecker(0.75, 4, 2)
    assert np.allclose(p.R_r_sqrt @ p.R_r_sqrt, p.R_r, atol=1e-12)


CHECKS: dict[str, Callable[[], None]] = {
    "filter taps and G": _check_taps,
    "orthant zero-mean formula": _check_orthant,
    "arcsin law (Monte Carlo)": _check_arcsin,
    "transmit matrix vs direct model": _check_phi,
    "mean Jacobian and Fisher information": _check_derivatives,
    "CSV/JSON round trip": _check_roundtrip,
    "channel prior square root": _check_prior,
}


def run_selftest(echo=print) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        try:
            fn()
            echo(f"PASS  {name}")
        except Exception as exc:  # report every failing check, then fail overall
            ok = False
            echo(f"FAIL  {name}: {exc!r}")
    return ok
