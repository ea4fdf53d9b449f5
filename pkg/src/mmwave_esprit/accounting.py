"""Pilot-overhead and modeled-complexity bookkeeping for the three schemes."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .config import SystemConfig


@dataclass(frozen=True)
class Accounting:
    n_paths: int
    t_proposed: int
    t_omp: float
    t_acs: float
    c_proposed: int
    c_omp: float
    c_acs: float

    @property
    def ratio_acs(self) -> float:
        """``c_proposed / c_acs``."""
        return self.c_proposed / self.c_acs

    @property
    def ratio_omp(self) -> float:
        """``c_proposed / c_omp``."""
        return self.c_proposed / self.c_omp

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ratio_acs"] = self.ratio_acs
        out["ratio_omp"] = self.ratio_omp
        return out


def overhead_and_complexity(config: SystemConfig, n_paths: int | None = None) -> Accounting:
    """Closed-form pilot overheads and dominant-cost operation counts.

    The proposed scheme's cost is its partial SVD, ``m1 (n_r - m2 + 1) L^2``;
    OMP pays for correlations plus support inversions,
    ``beams_t beams_r G^2 + iters^4``; ACS for its multi-stage search,
    ``2 L n_bs^3 log_K(G_acs / L)``.  Overheads follow the same parameters with
    ``N_RF = n_rf_bs``.
    """
    L = config.n_paths if n_paths is None else n_paths
    k = config.acs_k
    n_rf = config.n_rf_bs
    log_k = math.log(config.acs_grid / L, k)
    t_acs = k * L ** 2 * (k * L / n_rf) * log_k
    c_acs = 2 * L * config.n_bs ** 3 * log_k
    return Accounting(
        n_paths=L,
        t_proposed=config.pilot_overhead,
        t_omp=config.beams_t * config.beams_r / n_rf,
        t_acs=t_acs,
        c_proposed=config.m1 * (config.n_r - config.m2 + 1) * L ** 2,
        c_omp=config.beams_t * config.beams_r * config.omp_grid ** 2 + config.omp_iters ** 4,
        c_acs=c_acs,
    )
