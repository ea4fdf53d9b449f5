"""Monte Carlo orchestration over schemes and SNR points.

Every trial draws from its own counter-based random streams keyed by
``(seed, trial, purpose, snr index, scheme)``, so results do not depend on
how trials are distributed across worker processes.
"""

from __future__ import annotations

import functools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .accounting import overhead_and_complexity
from .channel import assemble_channel, draw_paths
from .config import SystemConfig
from .errors import ConfigurationError, EstimationError
from .metrics import ase, ber_16qam, mean_nmse_db, nmse_ratio
from .omp import build_dictionary, omp_estimate
from .reconstruction import estimate_channel
from .training import aggregate_training, estimate_effective_channel, simulate_uplink

log = logging.getLogger(__name__)

# Registry order fixes each scheme's random-stream key; append only.
SCHEMES = ("esprit", "omp", "perfect")

_CHANNEL, _NOISE, _SYMBOLS = 0, 1, 2


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@functools.lru_cache(maxsize=8)
def _esprit_plan(config: SystemConfig):
    return aggregate_training(config)


@functools.lru_cache(maxsize=8)
def _omp_setup(config: SystemConfig):
    plan = aggregate_training(config, config.omp_n_b_t, config.omp_n_b_r)
    return plan, build_dictionary(config, config.omp_grid, plan)


def pilot_overhead(config: SystemConfig, scheme: str) -> int:
    if scheme == "esprit":
        return config.pilot_overhead
    if scheme == "omp":
        n_b_t = config.omp_n_b_t or config.n_b_t
        n_b_r = config.omp_n_b_r or config.n_b_r
        return config.t_ms * n_b_t * n_b_r
    return 0


def complexity_ops(config: SystemConfig, scheme: str) -> float:
    acc = overhead_and_complexity(config)
    return {"esprit": acc.c_proposed, "omp": acc.c_omp}.get(scheme, 0)


def estimate(scheme: str, h: np.ndarray, config: SystemConfig, sigma_n_sq: float,
             rng: np.random.Generator) -> np.ndarray:
    """Run one scheme's training and estimation; return the channel estimate."""
    if scheme == "perfect":
        return h
    if scheme == "esprit":
        plan = _esprit_plan(config)
        y = simulate_uplink(h, plan, sigma_n_sq, rng)
        return estimate_channel(estimate_effective_channel(y, plan), plan, config).h_hat
    if scheme == "omp":
        plan, dictionary = _omp_setup(config)
        y = simulate_uplink(h, plan, sigma_n_sq, rng)
        return omp_estimate(estimate_effective_channel(y, plan), dictionary, config.omp_iters).h_hat
    raise ConfigurationError(f"unknown scheme {scheme!r}; registered: {', '.join(SCHEMES)}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep: system parameters plus schemes, output and parallelism.

    ``link_metrics=False`` skips the ASE/BER evaluation (NMSE only).
    """

    system: SystemConfig = field(default_factory=SystemConfig)
    schemes: tuple[str, ...] = ("esprit", "omp")
    out_dir: Path | None = None
    fmt: str = "csv"
    jobs: int = 1
    link_metrics: bool = True

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigurationError(f"unregistered schemes: {unknown}")
        if self.fmt not in ("csv", "json"):
            raise ConfigurationError(f"format must be csv or json, got {self.fmt!r}")
        if self.jobs < 1:
            raise ConfigurationError("jobs must be >= 1")


def run_trial(config: SystemConfig, schemes: tuple[str, ...], trial: int,
              link_metrics: bool = True) -> dict:
    """Evaluate every (scheme, SNR) pair on one channel realization.

    Returns:
        Mapping ``scheme -> array`` of shape ``(n_snr, 5)`` holding NMSE ratio,
        ASE, bit errors, bits and a failure flag per SNR point.
    """
    paths = draw_paths(config, _rng(config.seed, trial, _CHANNEL))
    h = assemble_channel(paths, config)
    n_rf = config.n_rf_bs
    out = {}
    for scheme in schemes:
        s_idx = SCHEMES.index(scheme)
        rows = np.full((len(config.snr_db_grid), 5), np.nan)
        for k, snr_db in enumerate(config.snr_db_grid):
            sigma_n_sq = config.sigma_n_sq(snr_db)
            try:
                h_hat = estimate(scheme, h, config, sigma_n_sq,
                                 _rng(config.seed, trial, _NOISE, k, s_idx))
                ratio = nmse_ratio(h, h_hat)
                if link_metrics:
                    rate = ase(h, h_hat, sigma_n_sq, n_rf)
                    errors, bits = ber_16qam(h, h_hat, sigma_n_sq,
                                             _rng(config.seed, trial, _SYMBOLS, k, s_idx),
                                             config.n_symbols, n_rf, return_counts=True)
                else:
                    rate, errors, bits = np.nan, np.nan, np.nan
            except (EstimationError, np.linalg.LinAlgError) as exc:
                log.debug("trial %d, %s at %g dB failed: %s", trial, scheme, snr_db, exc)
                rows[k, 4] = 1.0
                continue
            rows[k] = (ratio, rate, errors, bits, 0.0)
        out[scheme] = rows
    return out


def _run_trial_args(args):
    return run_trial(*args)


@dataclass
class TrialTable:
    """Per-trial outcomes: ``data[scheme]`` has shape ``(n_trials, n_snr, 5)``."""

    config: SystemConfig
    schemes: tuple[str, ...]
    data: dict

    def column(self, scheme: str, name: str) -> np.ndarray:
        """``(n_snr, n_trials)`` array of one outcome (NaN where the trial failed)."""
        idx = {"nmse_ratio": 0, "ase": 1, "errors": 2, "bits": 3, "failed": 4}[name]
        return self.data[scheme][:, :, idx].T


def run_trials(exp: ExperimentConfig) -> TrialTable:
    cfg = exp.system
    args = [(cfg, exp.schemes, t, exp.link_metrics) for t in range(cfg.n_trials)]
    if exp.jobs > 1 and cfg.n_trials > 1:
        chunk = max(1, cfg.n_trials // (4 * exp.jobs))
        with ProcessPoolExecutor(max_workers=exp.jobs) as pool:
            results = list(pool.map(_run_trial_args, args, chunksize=chunk))
    else:
        results = [_run_trial_args(a) for a in args]
    n_snr = len(cfg.snr_db_grid)
    data = {s: (np.stack([r[s] for r in results]) if results else np.zeros((0, n_snr, 5)))
            for s in exp.schemes}
    return TrialTable(cfg, exp.schemes, data)


@dataclass(frozen=True)
class MetricsRecord:
    scheme: str
    snr_db: float
    n_paths: int
    n_trials: int
    nmse_db: float
    ase_bps_hz: float
    ber: float
    pilot_overhead: int
    complexity_ops: float
    failure_rate: float


def aggregate(table: TrialTable) -> list[MetricsRecord]:
    """One record per (scheme, SNR); failed trials are excluded from the means."""
    cfg = table.config
    records = []
    for scheme in table.schemes:
        for k, snr_db in enumerate(cfg.snr_db_grid):
            rows = table.data[scheme][:, k, :]
            ok = rows[:, 4] == 0
            good = rows[ok]
            bits = np.nansum(good[:, 3])
            records.append(MetricsRecord(
                scheme=scheme,
                snr_db=float(snr_db),
                n_paths=cfg.n_paths,
                n_trials=cfg.n_trials,
                nmse_db=mean_nmse_db(good[:, 0]),
                ase_bps_hz=float(good[:, 1].mean()) if len(good) else float("nan"),
                ber=float(np.nansum(good[:, 2]) / bits) if bits > 0 else float("nan"),
                pilot_overhead=pilot_overhead(cfg, scheme),
                complexity_ops=complexity_ops(cfg, scheme),
                failure_rate=float(1.0 - ok.mean()) if len(rows) else 0.0,
            ))
    return records


def run_monte_carlo(exp: ExperimentConfig) -> list[MetricsRecord]:
    """Run the sweep and aggregate it into metrics records."""
    if not exp.system.snr_db_grid:
        return []
    return aggregate(run_trials(exp))
