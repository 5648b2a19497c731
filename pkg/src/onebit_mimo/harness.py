"""Seeded Monte Carlo sweeps and curve serialization.

Every trial draws its randomness from :func:`onebit_mimo.rng.stream` keyed by
``(seed, trial, purpose)``. Trials are processed in fixed-size chunks whose
boundaries do not depend on the worker count, and per-trial results are
reduced in trial order, so outputs are bit-identical for any ``workers``.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from functools import partial
from pathlib import Path

import numpy as np

from .bounds import bim_data_lower_oversampled, bim_data_m1, bim_prior, crb_jackknife
from .channel import ChannelPrior, complex_normal
from .config import SystemConfig
from .detection import DetectionConfig, SlidingWindowDetector, qpsk_from_index, wilson_half_width
from .estimation import LraLmmse, UnquantizedLmmse, mse_summary
from .linalg import NumericalError
from .parallel import ordered_map
from .quantization import quantize_1bit
from .rng import stream
from .signal import PulseBank
from .system import PilotModel, build_phi, make_pilots, received_signal, snr_to_noise_var

__all__ = [
    "SweepError",
    "CurveRecord",
    "pilot_model_for",
    "mse_point",
    "crb_point",
    "ser_point",
    "run_mse_sweep",
    "run_crb_sweep",
    "run_ser_sweep",
    "emit_csv",
    "emit_json",
    "read_csv",
    "read_json",
]

log = logging.getLogger(__name__)

MSE_CHUNK = 250
SER_CHUNK = 10


class SweepError(RuntimeError):
    """A numerical failure at an identified grid point."""


@dataclass(frozen=True)
class CurveRecord:
    sweep_name: str
    sweep_value: float
    M: int
    rho: float
    metric_name: str
    estimator: str
    value: float
    ci_half_width: float
    trials: int
    seed: int

    def __post_init__(self):
        if not (self.value >= 0 and self.ci_half_width >= 0):
            raise NumericalError(f"invalid metric value {self.value} (+- {self.ci_half_width})")


# ------------------------------------------------------------------ set-up


def pilot_model_for(cfg: SystemConfig, M: int, tau: int, snr_db: float, prior: ChannelPrior | None = None) -> PilotModel:
    """Pilot model of one grid point. Pilots depend only on (seed, tau)."""
    prior = prior or ChannelPrior.kronecker(cfg.rho, cfg.n_r, cfg.n_t)
    sigma_n2 = float(snr_to_noise_var(snr_db, cfg.n_t))
    bank = PulseBank(cfg.roll_off, tau, M)
    pilots = make_pilots(cfg.n_t, tau, stream(cfg.seed, tau, "pilots"))
    phi = build_phi(pilots, bank.Z, bank.u, cfg.n_r)
    return PilotModel(pilots, bank.pulse_matrix @ pilots, phi, sigma_n2 * bank.noise_cov, sigma_n2, bank)


def _draw_pilot_trial(pm: PilotModel, prior: ChannelPrior, rng):
    """Channel and unquantized received pilots of one trial."""
    w = complex_normal(rng, (prior.n_r, prior.n_t))
    H = prior.R_r_sqrt @ w @ prior.R_t_sqrt
    h = H.reshape(-1, order="F")
    noise = complex_normal(rng, (prior.n_r, pm.bank.G.shape[1])) @ pm.bank.G.T
    y = pm.Phi @ h + np.sqrt(pm.sigma_n2) * noise.reshape(-1)
    return H, h, y


# --------------------------------------------------------------------- MSE


def _mse_chunk(pm, prior, lra, lmmse, seed, purpose, trial_ids):
    se_q = np.empty(len(trial_ids))
    se_u = np.empty(len(trial_ids))
    for i, t in enumerate(trial_ids):
        _, h, y = _draw_pilot_trial(pm, prior, stream(seed, t, purpose))
        se_q[i] = np.sum(np.abs(lra(quantize_1bit(y)) - h) ** 2)
        se_u[i] = np.sum(np.abs(lmmse(y) - h) ** 2)
    return se_q, se_u


def _chunks(n, size):
    return [list(range(s, min(n, s + size))) for s in range(0, n, size)]


def mse_point(cfg: SystemConfig, M: int, tau: int, snr_db: float, workers: int = 1) -> dict:
    """Monte Carlo MSE of the quantized and unquantized estimators.

    Returns a dict with ``lra`` and ``lmmse`` entries of ``(mean, half_width)``
    plus the per-trial squared errors.
    """
    prior = ChannelPrior.kronecker(cfg.rho, cfg.n_r, cfg.n_t)
    pm = pilot_model_for(cfg, M, tau, snr_db, prior)
    lra = LraLmmse(pm.Phi, prior.C_hp, pm.sigma_n2, pm.bank.G)
    lmmse = UnquantizedLmmse(pm.Phi, prior.C_hp, pm.full_noise_cov())
    # the same channel draws serve every M and SNR of a sweep
    fn = partial(_mse_chunk, pm, prior, lra, lmmse, cfg.seed, f"mse-tau{tau}")
    parts = ordered_map(fn, _chunks(cfg.trials, MSE_CHUNK), workers)
    se_q = np.concatenate([p[0] for p in parts])
    se_u = np.concatenate([p[1] for p in parts])
    n = prior.size
    return {"lra": mse_summary(se_q, n), "lmmse": mse_summary(se_u, n), "se_lra": se_q, "se_lmmse": se_u}


def crb_point(cfg: SystemConfig, M: int, tau: int, snr_db: float, workers: int = 1):
    """Per-coefficient Bayesian CRB (exact for M = 1, upper bound otherwise).

    Returns ``(bound, half_width, bim)``.
    """
    prior = ChannelPrior.kronecker(cfg.rho, cfg.n_r, cfg.n_t)
    pm = pilot_model_for(cfg, M, tau, snr_db, prior)
    rng = stream(cfg.seed, tau, "bound-draws")
    if M == 1:
        bim = bim_data_m1(pm.Phi, pm.sigma_n2, prior, cfg.bound_draws, rng, C_n=pm.C_n, workers=workers)
    else:
        bim = bim_data_lower_oversampled(pm.Phi, pm.C_n, prior, cfg.bound_draws, rng, workers=workers)
    bound, hw = crb_jackknife(bim, bim_prior(prior.C_hp))
    return bound, hw, bim


def _grid(cfg: SystemConfig):
    """(sweep value, tau, snr) triples of the configured sweep."""
    if cfg.sweep == "snr":
        return [(s, cfg.tau[0], s) for s in cfg.snr_db]
    return [(t, t, cfg.snr_db[0]) for t in cfg.tau]


def _guard(what, M, x, fn):
    try:
        return fn()
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        raise SweepError(f"{what} failed at M={M}, point={x}: {exc}") from exc


def _record(cfg, x, M, metric, est, value, hw, n):
    name = "snr_db" if cfg.sweep == "snr" else "tau"
    if not (math.isfinite(value) and math.isfinite(hw)):
        raise SweepError(f"non-finite {metric} for {est} at M={M}, {name}={x}")
    return CurveRecord(name, float(x), int(M), float(cfg.rho), metric, est, float(value), float(hw), int(n), int(cfg.seed))


def run_mse_sweep(cfg: SystemConfig, workers: int = 1) -> list[CurveRecord]:
    """MSE of LRA-LMMSE and unquantized LMMSE (plus the CRB if enabled)."""
    out = []
    for M in cfg.m:
        for x, tau, snr in _grid(cfg):
            res = _guard("MSE", M, x, lambda: mse_point(cfg, M, tau, snr, workers))
            out.append(_record(cfg, x, M, "mse", "lra-lmmse", *res["lra"], cfg.trials))
            out.append(_record(cfg, x, M, "mse", "lmmse-unquantized", *res["lmmse"], cfg.trials))
            if cfg.include_bounds:
                b, hw, _ = _guard("bound", M, x, lambda: crb_point(cfg, M, tau, snr, workers))
                out.append(_record(cfg, x, M, "crb_bound", _bound_id(M), b, hw, cfg.bound_draws))
            log.info("mse point M=%d x=%s done", M, x)
    return out


def _bound_id(M):
    return "bcrb-exact" if M == 1 else "bcrb-moment-upper"


def run_crb_sweep(cfg: SystemConfig, workers: int = 1) -> list[CurveRecord]:
    out = []
    for M in cfg.m:
        for x, tau, snr in _grid(cfg):
            b, hw, _ = _guard("bound", M, x, lambda: crb_point(cfg, M, tau, snr, workers))
            out.append(_record(cfg, x, M, "crb_bound", _bound_id(M), b, hw, cfg.bound_draws))
    return out


# --------------------------------------------------------------------- SER


def _ser_chunk(pm, prior, lra, det, n_data, seed, purpose, block_ids):
    """Symbol errors with perfect and estimated CSI on the same data."""
    M = pm.bank.oversampling
    err_p = err_e = 0
    bank = det.bank
    for b in block_ids:
        rng = stream(seed, b, purpose)
        H, _, y_p = _draw_pilot_trial(pm, prior, rng)
        H_hat = lra(quantize_1bit(y_p)).reshape(prior.n_t, prior.n_r).T
        idx = rng.integers(0, 4, (prior.n_t, n_data))
        y = received_signal(H, qpsk_from_index(idx).T, bank.Z, bank.u).reshape(prior.n_r, M * n_data)
        y = y + np.sqrt(pm.sigma_n2) * (complex_normal(rng, (prior.n_r, bank.G.shape[1])) @ bank.G.T)
        yq = quantize_1bit(y)
        err_p += int(np.count_nonzero(det.detect(yq, H) != idx))
        err_e += int(np.count_nonzero(det.detect(yq, H_hat) != idx))
    return err_p, err_e


def ser_point(cfg: SystemConfig, M: int, snr_db: float, workers: int = 1) -> dict:
    """SER with perfect and LRA-LMMSE-estimated channels.

    Returns ``{"perfect": (ser, hw), "estimated": (ser, hw), "symbols": n}``.
    """
    tau = cfg.tau[0]
    prior = ChannelPrior.kronecker(cfg.rho, cfg.n_r, cfg.n_t)
    pm = pilot_model_for(cfg, M, tau, snr_db, prior)
    lra = LraLmmse(pm.Phi, prior.C_hp, pm.sigma_n2, pm.bank.G)
    det = SlidingWindowDetector(
        PulseBank(cfg.roll_off, cfg.n_data, M), pm.sigma_n2, DetectionConfig(cfg.window, cfg.n_data)
    )
    n_blocks = math.ceil(cfg.ser_symbols / (cfg.n_t * cfg.n_data))
    fn = partial(_ser_chunk, pm, prior, lra, det, cfg.n_data, cfg.seed, f"ser-tau{tau}")
    parts = ordered_map(fn, _chunks(n_blocks, SER_CHUNK), workers)
    total = n_blocks * cfg.n_t * cfg.n_data
    ep = sum(p[0] for p in parts)
    ee = sum(p[1] for p in parts)
    return {
        "perfect": (ep / total, wilson_half_width(ep, total)),
        "estimated": (ee / total, wilson_half_width(ee, total)),
        "symbols": total,
    }


def run_ser_sweep(cfg: SystemConfig, workers: int = 1) -> list[CurveRecord]:
    out = []
    for M in cfg.m:
        for snr in cfg.snr_db:
            res = _guard("SER", M, snr, lambda: ser_point(cfg, M, snr, workers))
            for est in ("perfect", "estimated"):
                out.append(
                    CurveRecord("snr_db", float(snr), int(M), float(cfg.rho), "ser", f"{est}-csi",
                                float(res[est][0]), float(res[est][1]), int(res["symbols"]), int(cfg.seed))
                )
    return out


# ------------------------------------------------------------------ output

_FIELDS = [f.name for f in fields(CurveRecord)]
_TYPES = {"sweep_value": float, "M": int, "rho": float, "value": float, "ci_half_width": float, "trials": int, "seed": int}


def _fmt(v):
    return f"{v:.16e}" if isinstance(v, float) else str(v)


def _write_csv(records, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(_FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, k)) for k in _FIELDS])


def emit_csv(records, path) -> None:
    """Write records as CSV to a path or an open text stream."""
    if hasattr(path, "write"):
        _write_csv(records, path)
        return
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            _write_csv(records, fh)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_json(records, path) -> None:
    """Write records as a JSON array to a path or an open text stream."""
    text = json.dumps([asdict(r) for r in records], indent=1) + "\n"
    if hasattr(path, "write"):
        path.write(text)
        return
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def _coerce(row: dict) -> CurveRecord:
    if set(row) != set(_FIELDS):
        raise ValueError(f"unexpected fields {sorted(row)}")
    return CurveRecord(**{k: _TYPES.get(k, str)(row[k]) for k in _FIELDS})


def read_csv(path) -> list[CurveRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != _FIELDS:
            raise ValueError(f"{path}: header does not match CurveRecord fields")
        return [_coerce(row) for row in reader]


def read_json(path) -> list[CurveRecord]:
    return [_coerce(row) for row in json.loads(Path(path).read_text())]
