"""Path-gain recovery and full-dimensional channel reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import khatri_rao

from .channel import steering_matrix
from .config import SystemConfig
from .errors import SingularityError
from .esprit import AngleEstimates, unitary_esprit
from .training import EffectiveChannel, TrainingPlan

DUPLICATE_TOL = 1e-6


@dataclass(frozen=True)
class ChannelEstimate:
    """Reconstructed channel ``h_hat = a_bs_hat diag(d_hat) a_ms_hat^H``."""

    h_hat: np.ndarray
    d_hat: np.ndarray
    a_bs_hat: np.ndarray
    a_ms_hat: np.ndarray


def gain_sensing_matrix(angles: AngleEstimates, plan: TrainingPlan, delta: float,
                        n_bs: int, n_ms: int) -> np.ndarray:
    """``Z = (A_ms^H F~)^T kr (W~^H A_bs)`` so that ``vec(H_bar) = Z d``."""
    a_bs = steering_matrix(angles.aoa, n_bs, delta)
    a_ms = steering_matrix(angles.aod, n_ms, delta)
    tx = (a_ms.conj().T @ plan.f_agg).T
    rx = plan.w_agg.conj().T @ a_bs
    return khatri_rao(tx, rx)


def _check_duplicates(angles: AngleEstimates):
    aoa, aod = angles.aoa, angles.aod
    for a in range(len(aoa)):
        for b in range(a + 1, len(aoa)):
            if abs(aoa[a] - aoa[b]) < DUPLICATE_TOL and abs(aod[a] - aod[b]) < DUPLICATE_TOL:
                raise SingularityError(
                    f"paths {a} and {b} have coinciding angle pairs", indices=(a, b))


def estimate_gains(h_bar: EffectiveChannel | np.ndarray, angles: AngleEstimates,
                   plan: TrainingPlan, config: SystemConfig) -> np.ndarray:
    """LS path gains ``argmin_d ||vec(H_bar) - Z d||``.

    The returned gains are the diagonal of D, i.e. they include the
    ``sqrt(n_bs n_ms / L)`` factor.  The solve goes through an orthogonal
    factorization rather than the normal equations.

    Raises:
        SingularityError: for coinciding angle pairs or a rank-deficient Z.
    """
    h = np.asarray(getattr(h_bar, "h_bar", h_bar))
    _check_duplicates(angles)
    z = gain_sensing_matrix(angles, plan, config.delta, config.n_bs, config.n_ms)
    d_hat, _, rank, sv = np.linalg.lstsq(z, h.reshape(-1, order="F"), rcond=None)
    if rank < z.shape[1]:
        cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
        raise SingularityError(f"gain matrix rank {rank} < {z.shape[1]}",
                               condition_number=float(cond))
    return d_hat


def reconstruct_channel(angles: AngleEstimates, d_hat, config: SystemConfig) -> ChannelEstimate:
    """Rebuild the ``n_bs x n_ms`` channel from angles and scaled gains."""
    d_hat = np.asarray(d_hat, dtype=complex)
    if len(d_hat) != len(angles):
        raise ValueError(f"{len(angles)} angle pairs but {len(d_hat)} gains")
    a_bs = steering_matrix(angles.aoa, config.n_bs, config.delta)
    a_ms = steering_matrix(angles.aod, config.n_ms, config.delta)
    h_hat = (a_bs * d_hat) @ a_ms.conj().T
    return ChannelEstimate(h_hat, d_hat, a_bs, a_ms)


def estimate_channel(h_bar: EffectiveChannel | np.ndarray, plan: TrainingPlan,
                     config: SystemConfig, n_paths: int | None = None) -> ChannelEstimate:
    """Effective channel to full channel estimate: angles, gains, reconstruction."""
    n_paths = config.n_paths if n_paths is None else n_paths
    angles = unitary_esprit(h_bar, config.m1, config.m2, n_paths, config.delta)
    d_hat = estimate_gains(h_bar, angles, plan, config)
    return reconstruct_channel(angles, d_hat, config)
