"""Hybrid training design and effective-channel extraction.

Each precoder block ``F_j = F_RF,j F_BB,j`` is a scaled selection of ``n_s``
consecutive MS antennas, and likewise each combiner block selects ``n_s`` BS
antennas.  Stacking all blocks makes the aggregated precoder/combiner a scaled
``[I; 0]``, so the observed effective channel is a scaled top-left submatrix of
H and keeps the shift invariance of both array responses.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .config import SystemConfig
from .errors import ConfigurationError


def dft_matrix(n: int) -> np.ndarray:
    """Unnormalized DFT matrix: unit-modulus entries, ``U^H U = n I``."""
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def build_pilot(n_s: int) -> np.ndarray:
    """Pilot block S with ``S S^H = n_s I`` and ``T_MS = n_s`` time slots."""
    if n_s < 1:
        raise ConfigurationError("n_s must be >= 1")
    return dft_matrix(n_s)


def _analog_block(index: int, n_ant: int, n_rf: int, n_s: int) -> tuple[np.ndarray, np.ndarray]:
    """Unscaled ``(RF, BB)`` pair whose product puts ``n_rf * I`` on rows of block ``index``."""
    u = dft_matrix(n_rf)
    bb = u[:, :n_s]
    filler = u[:, n_rf - 1]
    # rows are u^H: the filler column is orthogonal to every selected baseband column
    before = np.repeat(filler[:, None], (index - 1) * n_s, axis=1)
    after = np.repeat(filler[:, None], n_ant - index * n_s, axis=1)
    rf = np.hstack([before, bb, after]).conj().T
    return rf, bb


def _check_block(index: int, n_blocks: int, n_ant: int, n_rf: int, n_s: int, side: str):
    if not 1 <= index <= n_blocks:
        raise IndexError(f"{side} block index {index} outside [1, {n_blocks}]")
    if n_s >= n_rf:
        raise ConfigurationError(
            f"{side} training needs n_s < n_rf (n_s = n_rf - 1 nominally), "
            f"got n_s = {n_s}, n_rf = {n_rf}")
    if index * n_s > n_ant:
        raise ConfigurationError(f"{side} block {index} exceeds {n_ant} antennas")


def build_precoder_block(j: int, config: SystemConfig, n_blocks: int | None = None):
    """Hybrid precoder for training block ``j`` (1-based).

    Returns:
        ``(F_RF, F_BB, F)`` where ``F_RF`` has constant-modulus entries
        ``1/sqrt(n_ms)``, ``||F_RF F_BB||_F^2 = n_rf_ms`` and
        ``F = alpha_f [0; I_{n_s}; 0]`` with the identity on rows
        ``(j-1) n_s + 1 .. j n_s``.
    """
    n_blocks = config.n_b_t if n_blocks is None else n_blocks
    n, n_rf, n_s = config.n_ms, config.n_rf_ms, config.n_s
    _check_block(j, n_blocks, n, n_rf, n_s, "precoder")
    rf, bb = _analog_block(j, n, n_rf, n_s)
    f_rf = rf / np.sqrt(n)
    # baseband scale meeting the total transmit power constraint
    f_bb = bb * np.sqrt(n / (n_rf * n_s))
    return f_rf, f_bb, f_rf @ f_bb


def build_combiner_block(i: int, config: SystemConfig, n_blocks: int | None = None):
    """Hybrid combiner for training block ``i`` (1-based); mirrors the precoder.

    No power normalization applies at the receiver, so
    ``W = (n_rf_bs / sqrt(n_bs)) [0; I_{n_s}; 0]``.
    """
    n_blocks = config.n_b_r if n_blocks is None else n_blocks
    n, n_rf, n_s = config.n_bs, config.n_rf_bs, config.n_s
    _check_block(i, n_blocks, n, n_rf, n_s, "combiner")
    rf, bb = _analog_block(i, n, n_rf, n_s)
    w_rf = rf / np.sqrt(n)
    return w_rf, bb, w_rf @ bb


@dataclass(frozen=True)
class TrainingPlan:
    """Aggregated training signals for one estimation window.

    Attributes:
        f_agg: aggregated precoder, ``n_ms x n_b_t n_s``.
        w_agg: aggregated combiner, ``n_bs x n_b_r n_s``.
        pilot: pilot block S, ``n_s x n_s``.
        alpha_f, alpha_w: scale factors of ``f_agg`` and ``w_agg``.
        precoder_blocks, combiner_blocks: per-block ``(RF, BB, product)`` triples.
    """

    f_agg: np.ndarray
    w_agg: np.ndarray
    pilot: np.ndarray
    alpha_f: float
    alpha_w: float
    precoder_blocks: tuple = field(repr=False)
    combiner_blocks: tuple = field(repr=False)

    @property
    def n_s(self) -> int:
        return self.pilot.shape[0]

    @property
    def n_b_t(self) -> int:
        return len(self.precoder_blocks)

    @property
    def n_b_r(self) -> int:
        return len(self.combiner_blocks)

    @property
    def n_t(self) -> int:
        return self.f_agg.shape[1]

    @property
    def n_r(self) -> int:
        return self.w_agg.shape[1]

    @property
    def pilot_overhead(self) -> int:
        return self.pilot.shape[1] * self.n_b_r * self.n_b_t

    @property
    def scale(self) -> float:
        return self.alpha_w * self.alpha_f


def aggregate_training(config: SystemConfig, n_b_t: int | None = None,
                       n_b_r: int | None = None) -> TrainingPlan:
    """Stack all precoder/combiner blocks into the aggregated training plan.

    ``n_b_t``/``n_b_r`` override the block counts of ``config`` (used to give
    the OMP baseline its own overhead).
    """
    n_b_t = config.n_b_t if n_b_t is None else n_b_t
    n_b_r = config.n_b_r if n_b_r is None else n_b_r
    if n_b_t * config.n_s > config.n_ms or n_b_r * config.n_s > config.n_bs:
        raise ConfigurationError("training blocks exceed the antenna count")
    pre = tuple(build_precoder_block(j, config, n_b_t) for j in range(1, n_b_t + 1))
    comb = tuple(build_combiner_block(i, config, n_b_r) for i in range(1, n_b_r + 1))
    f_agg = np.hstack([blk[2] for blk in pre])
    w_agg = np.hstack([blk[2] for blk in comb])
    return TrainingPlan(
        f_agg=f_agg,
        w_agg=w_agg,
        pilot=build_pilot(config.n_s),
        alpha_f=float(np.sqrt(config.n_rf_ms / config.n_s)),
        alpha_w=float(config.n_rf_bs / np.sqrt(config.n_bs)),
        precoder_blocks=pre,
        combiner_blocks=comb,
    )


def aggregated_pilot(plan: TrainingPlan) -> np.ndarray:
    """Block-diagonal repetition of the pilot, one copy per transmit block."""
    return block_diag(*([plan.pilot] * plan.n_b_t))


def simulate_uplink(h: np.ndarray, plan: TrainingPlan, sigma_n_sq: float,
                    rng: np.random.Generator | None = None) -> np.ndarray:
    """Aggregated received training signal over all ``n_b_r * n_b_t`` blocks.

    Noise is drawn at the BS antennas for every receive block and then passed
    through that block's combiner.
    """
    s_bar = aggregated_pilot(plan)
    y = plan.w_agg.conj().T @ h @ plan.f_agg @ s_bar
    if sigma_n_sq > 0:
        if rng is None:
            raise ValueError("rng required when sigma_n_sq > 0")
        n_bs = h.shape[0]
        shape = (plan.n_b_r, n_bs, s_bar.shape[1])
        noise = np.sqrt(sigma_n_sq / 2) * (rng.standard_normal(shape)
                                           + 1j * rng.standard_normal(shape))
        w_blocks = np.stack([blk[2] for blk in plan.combiner_blocks])
        y = y + np.einsum("ias,iat->ist", w_blocks.conj(), noise).reshape(y.shape)
    return y


@dataclass(frozen=True)
class EffectiveChannel:
    """LS estimate of ``W~^H H F~`` (``n_r x n_t``) and the scale it carries."""

    h_bar: np.ndarray
    scale: float

    @property
    def shape(self):
        return self.h_bar.shape


def estimate_effective_channel(y: np.ndarray, plan: TrainingPlan) -> EffectiveChannel:
    """LS de-spreading of the pilot: ``Y S_bar^H / n_s``."""
    s_bar = aggregated_pilot(plan)
    return EffectiveChannel(y @ s_bar.conj().T / plan.n_s, plan.scale)
