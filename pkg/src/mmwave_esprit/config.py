"""System configuration and config-file loading."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigurationError

DEFAULT_SNR_GRID = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)


@dataclass(frozen=True)
class SystemConfig:
    """All dimensional and physical parameters of one simulated link.

    Defaults describe the standard link: 64x64 ULAs with
    half-wavelength spacing, 4 RF chains per side, 3 streams, 10x10 training
    blocks and stacking parameters m1 = m2 = 13.

    The ``omp_*``, ``beams_*`` and ``acs_*`` fields only feed the OMP baseline
    and the overhead/complexity accounting.  ``omp_n_b_t``/``omp_n_b_r`` set
    the training blocks used to build the OMP observation; ``None`` reuses the
    blocks of the proposed scheme.
    """

    n_bs: int = 64
    n_ms: int = 64
    n_rf_bs: int = 4
    n_rf_ms: int = 4
    n_s: int = 3
    n_b_t: int = 10
    n_b_r: int = 10
    delta: float = 0.5
    n_paths: int = 5
    m1: int = 13
    m2: int = 13
    sigma_alpha_sq: float = 1.0
    angle_range: float = math.pi / 3
    snr_db_grid: tuple[float, ...] = DEFAULT_SNR_GRID
    n_trials: int = 100
    seed: int = 0
    min_separation: float = 0.0
    n_symbols: int = 64
    omp_grid: int = 150
    omp_iters: int = 50
    omp_n_b_t: int | None = 16
    omp_n_b_r: int | None = 12
    beams_t: int = 48
    beams_r: int = 48
    acs_k: int = 4
    acs_grid: int = 320

    def __post_init__(self):
        object.__setattr__(self, "snr_db_grid", tuple(float(s) for s in self.snr_db_grid))
        self.validate()

    @property
    def n_r(self) -> int:
        """Rows of the effective channel (receive side)."""
        return self.n_b_r * self.n_s

    @property
    def n_t(self) -> int:
        """Columns of the effective channel (transmit side)."""
        return self.n_b_t * self.n_s

    @property
    def t_ms(self) -> int:
        return self.n_s

    @property
    def pilot_overhead(self) -> int:
        return self.t_ms * self.n_b_r * self.n_b_t

    def sigma_n_sq(self, snr_db: float) -> float:
        """Noise variance for ``snr_db`` defined as 10 log10(sigma_alpha^2 / sigma_n^2)."""
        return self.sigma_alpha_sq * 10.0 ** (-snr_db / 10.0)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        out["snr_db_grid"] = list(self.snr_db_grid)
        return out

    def validate(self) -> None:
        for name in ("n_bs", "n_ms", "n_rf_bs", "n_rf_ms", "n_s", "n_b_t", "n_b_r",
                     "n_paths", "m1", "m2", "n_trials", "n_symbols", "omp_grid"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not self.n_s <= self.n_rf_ms <= self.n_ms:
            raise ConfigurationError("require n_s <= n_rf_ms <= n_ms")
        if not self.n_s <= self.n_rf_bs <= self.n_bs:
            raise ConfigurationError("require n_s <= n_rf_bs <= n_bs")
        if self.n_t > self.n_ms:
            raise ConfigurationError(
                f"n_b_t * n_s = {self.n_t} exceeds n_ms = {self.n_ms}")
        if self.n_r > self.n_bs:
            raise ConfigurationError(
                f"n_b_r * n_s = {self.n_r} exceeds n_bs = {self.n_bs}")
        if not 2 <= self.m1 <= self.n_t:
            raise ConfigurationError(f"m1 must lie in [2, {self.n_t}], got {self.m1}")
        if not 1 <= self.m2 <= self.n_r - 1:
            raise ConfigurationError(f"m2 must lie in [1, {self.n_r - 1}], got {self.m2}")
        if self.delta <= 0:
            raise ConfigurationError("delta must be positive")
        if self.sigma_alpha_sq <= 0:
            raise ConfigurationError("sigma_alpha_sq must be positive")
        # tan(pi * delta * sin(angle)) must stay away from its poles
        limit = math.pi / 2 if 2 * self.delta <= 1 else math.asin(1 / (2 * self.delta))
        if not 0 < self.angle_range < limit:
            raise ConfigurationError(
                f"angle_range must lie in (0, {limit:.6g}) for delta = {self.delta}")
        if self.min_separation < 0:
            raise ConfigurationError("min_separation must be non-negative")
        if self.omp_iters < 0:
            raise ConfigurationError("omp_iters must be non-negative")
        if self.omp_n_b_t is not None and self.omp_n_b_t * self.n_s > self.n_ms:
            raise ConfigurationError("omp_n_b_t * n_s exceeds n_ms")
        if self.omp_n_b_r is not None and self.omp_n_b_r * self.n_s > self.n_bs:
            raise ConfigurationError("omp_n_b_r * n_s exceeds n_bs")


CONFIG_FIELDS = frozenset(f.name for f in dataclasses.fields(SystemConfig))


def config_from_mapping(data: Mapping[str, Any], base: SystemConfig | None = None) -> SystemConfig:
    """Build a config from a mapping, rejecting unknown keys."""
    unknown = sorted(set(data) - CONFIG_FIELDS)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    base = base or SystemConfig()
    return base.replace(**dict(data))


def load_config(path: str | Path) -> SystemConfig:
    """Load a YAML (or JSON) config file whose keys are ``SystemConfig`` fields."""
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return config_from_mapping(data)
