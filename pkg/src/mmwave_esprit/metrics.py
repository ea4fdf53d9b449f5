"""Link-level metrics: NMSE, spectral efficiency and 16-QAM bit error rate."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import UndefinedMetricError

NMSE_FLOOR_DB = -300.0
_RATIO_FLOOR = 1e-30


def nmse_ratio(h_true: np.ndarray, h_est: np.ndarray) -> float:
    """``||H - H_hat||_F^2 / ||H||_F^2`` for one realization."""
    h_true = np.asarray(h_true)
    h_est = np.asarray(h_est)
    if h_true.shape != h_est.shape:
        raise ValueError(f"shape mismatch {h_true.shape} vs {h_est.shape}")
    ref = np.linalg.norm(h_true) ** 2
    if ref == 0:
        raise UndefinedMetricError("NMSE undefined for a zero reference channel")
    return float(np.linalg.norm(h_true - h_est) ** 2 / ref)


def ratio_to_db(ratio) -> float:
    """10 log10 with ratios below 1e-30 clamped to the -300 dB sentinel."""
    ratio = float(ratio)
    if ratio < _RATIO_FLOOR:
        return NMSE_FLOOR_DB
    return 10.0 * np.log10(ratio)


def nmse(h_true: np.ndarray, h_est: np.ndarray) -> float:
    """Single-realization NMSE in dB."""
    return ratio_to_db(nmse_ratio(h_true, h_est))


def mean_nmse_db(ratios) -> float:
    """Average squared-error ratios first, then convert to dB."""
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0:
        return float("nan")
    return ratio_to_db(ratios.mean())


def svd_beamformers(h_est: np.ndarray, n_rf: int) -> tuple[np.ndarray, np.ndarray]:
    """``(W_opt, F_opt)``: leading ``n_rf`` left/right singular vectors of ``h_est``."""
    u, _, vh = np.linalg.svd(h_est)
    return u[:, :n_rf], vh.conj().T[:, :n_rf]


def ase(h_true: np.ndarray, h_est: np.ndarray, sigma_n_sq: float, n_rf: int) -> float:
    """Spectral efficiency (bits/s/Hz) of SVD beamforming designed on ``h_est``.

    Beamformers come from the estimate; the true channel sets the rate:
    ``log2 det(I + R_n^{-1} W^H H F F^H H^H W / n_rf)``, ``R_n = sigma_n^2 W^H W``.
    """
    if n_rf > min(h_true.shape):
        raise ValueError("n_rf exceeds the antenna count")
    w, f = svd_beamformers(h_est, n_rf)
    r_n = sigma_n_sq * (w.conj().T @ w)
    eff = w.conj().T @ h_true @ f
    try:
        gram = np.linalg.solve(r_n, eff @ eff.conj().T)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular noise covariance") from exc
    _, logdet = np.linalg.slogdet(np.eye(n_rf) + gram / n_rf)
    return float(logdet / np.log(2))


# Gray-coded 4-PAM per I/Q rail: bit pair (b0 b1) -> level
_PAM_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])  # index = 2 b0 + b1
_QAM_SCALE = 1.0 / np.sqrt(10.0)


def qam16_modulate(bits: np.ndarray) -> np.ndarray:
    """Map groups of 4 bits (I pair, Q pair) to unit-average-power 16-QAM symbols."""
    b = np.asarray(bits, dtype=np.int8).reshape(-1, 4)
    i = _PAM_LEVELS[2 * b[:, 0] + b[:, 1]]
    q = _PAM_LEVELS[2 * b[:, 2] + b[:, 3]]
    return (i + 1j * q) * _QAM_SCALE


def _pam_demap(x: np.ndarray) -> np.ndarray:
    b0 = (x > 0).astype(np.int8)
    b1 = (np.abs(x) < 2).astype(np.int8)
    return np.stack([b0, b1], axis=-1)


def qam16_demodulate(symbols: np.ndarray) -> np.ndarray:
    """Hard-decision inverse of :func:`qam16_modulate`."""
    s = np.asarray(symbols).ravel() / _QAM_SCALE
    return np.concatenate([_pam_demap(s.real), _pam_demap(s.imag)], axis=-1).reshape(-1)


def ber_16qam(h_true: np.ndarray, h_est: np.ndarray, sigma_n_sq: float,
              rng: np.random.Generator, n_symbols: int, n_rf: int = 4,
              return_counts: bool = False):
    """Bit error rate of ``n_rf`` 16-QAM streams over SVD beamforming.

    Streams are precoded by ``F_opt`` with total power 1 split evenly, pass
    through the true channel and AWGN, are combined by ``W_opt`` and then
    zero-forced with the estimated effective matrix ``W_opt^H H_hat F_opt``.

    Args:
        n_symbols: symbol vectors (each carrying ``4 n_rf`` bits).
        return_counts: return ``(errors, bits)`` instead of the rate.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    w, f = svd_beamformers(h_est, n_rf)
    bits = rng.integers(0, 2, size=(n_symbols, n_rf, 4), dtype=np.int8)
    s = qam16_modulate(bits).reshape(n_symbols, n_rf).T
    noise = np.sqrt(sigma_n_sq / 2) * (rng.standard_normal((h_true.shape[0], n_symbols))
                                       + 1j * rng.standard_normal((h_true.shape[0], n_symbols)))
    y = w.conj().T @ (h_true @ f @ s / np.sqrt(n_rf) + noise)
    eff = w.conj().T @ h_est @ f / np.sqrt(n_rf)
    try:
        s_hat = np.linalg.solve(eff, y)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular effective matrix in ZF equalizer") from exc
    bits_hat = qam16_demodulate(s_hat.T)
    errors = int(np.count_nonzero(bits_hat != bits.reshape(-1)))
    if return_counts:
        return errors, bits.size
    return errors / bits.size


def match_angles(true_aoa, true_aod, est_aoa, est_aod):
    """Optimal one-to-one assignment of estimated to true angle pairs.

    Returns:
        ``(true_index, est_index)`` arrays minimizing the summed absolute
        AoA + AoD error.
    """
    ta, td = np.asarray(true_aoa), np.asarray(true_aod)
    ea, ed = np.asarray(est_aoa), np.asarray(est_aod)
    cost = np.abs(ta[:, None] - ea[None, :]) + np.abs(td[:, None] - ed[None, :])
    return linear_sum_assignment(cost)
