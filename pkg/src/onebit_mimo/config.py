"""Scenario configuration and its flat ``key = value`` file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import get_type_hints

__all__ = ["ConfigError", "SystemConfig", "parse_config", "load_config"]


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


@dataclass(frozen=True)
class SystemConfig:
    """All parameters of a sweep.

    ``sweep`` selects the x-axis of MSE sweeps: ``"snr"`` walks ``snr_db`` at
    a single ``tau``, ``"tau"`` walks ``tau`` at a single SNR.
    """

    n_t: int = 4
    n_r: int = 16
    n_data: int = 100
    tau: tuple[int, ...] = (40,)
    m: tuple[int, ...] = (1, 2, 3)
    roll_off: float = 0.8
    rho: float = 0.0
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    sweep: str = "snr"
    trials: int = 2000
    bound_draws: int = 200
    ser_symbols: int = 600_000
    seed: int = 0
    window: int = 3
    include_bounds: bool = True

    def __post_init__(self):
        for name in ("tau", "m", "snr_db"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not (1 <= self.n_t <= self.n_r):
            raise ConfigError("need 1 <= n_t <= n_r")
        if any(t < self.n_t for t in self.tau):
            raise ConfigError("every tau must be >= n_t")
        if not self.tau:
            raise ConfigError("tau must not be empty")
        if any(mm < 1 for mm in self.m):
            raise ConfigError("oversampling factors must be >= 1")
        if self.trials < 1 or self.bound_draws < 1 or self.ser_symbols < 1 or self.n_data < 1:
            raise ConfigError("trials, bound_draws, ser_symbols and n_data must be >= 1")
        if not (0.0 <= self.rho < 1.0):
            raise ConfigError("rho must lie in [0, 1)")
        if not (0.0 < self.roll_off <= 1.0):
            raise ConfigError("roll_off must lie in (0, 1]")
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError("window must be a positive odd integer")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.sweep not in ("snr", "tau"):
            raise ConfigError("sweep must be 'snr' or 'tau'")
        if self.sweep == "snr" and len(self.tau) != 1:
            raise ConfigError("an SNR sweep needs exactly one tau")
        if self.sweep == "tau" and len(self.snr_db) != 1:
            raise ConfigError("a tau sweep needs exactly one SNR")

    def replace(self, **changes) -> "SystemConfig":
        try:
            return dataclasses.replace(self, **changes)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def _convert(raw: str, typ, key: str):
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ in (int, float, str):
            return typ(raw)
        # tuple[int, ...] or tuple[float, ...]
        elem = typ.__args__[0]
        return tuple(elem(p) for p in raw.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def parse_config(text: str, base: SystemConfig | None = None) -> SystemConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys fail."""
    hints = get_type_hints(SystemConfig)
    known = {f.name for f in fields(SystemConfig)}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(raw, hints[key], key)
    return (base or SystemConfig()).replace(**values)


def load_config(path: str | Path, base: SystemConfig | None = None) -> SystemConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base)
