"""Geometric sparse mmWave channel with ULA steering vectors at both ends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .errors import ConfigurationError


def steering_vector(angle: float, n: int, delta: float) -> np.ndarray:
    """Unit-norm ULA response ``exp(j 2 pi k delta sin(angle)) / sqrt(n)``, k = 0..n-1."""
    if n < 1 or delta <= 0:
        raise ConfigurationError("steering_vector needs n >= 1 and delta > 0")
    k = np.arange(n)
    return np.exp(2j * np.pi * delta * np.sin(angle) * k) / np.sqrt(n)


def steering_matrix(angles, n: int, delta: float) -> np.ndarray:
    """Stack steering vectors for ``angles`` column-wise into an ``n x len(angles)`` array."""
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    k = np.arange(n)[:, None]
    return np.exp(2j * np.pi * delta * k * np.sin(angles)[None, :]) / np.sqrt(n)


@dataclass(frozen=True)
class PathSet:
    """Ground-truth propagation paths.

    Attributes:
        aoa: arrival azimuths at the BS (radians).
        aod: departure azimuths at the MS (radians).
        gains: complex path gains.
    """

    aoa: np.ndarray
    aod: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        aoa = np.asarray(self.aoa, dtype=float).ravel()
        aod = np.asarray(self.aod, dtype=float).ravel()
        gains = np.asarray(self.gains, dtype=complex).ravel()
        if not len(aoa) == len(aod) == len(gains):
            raise ConfigurationError("aoa, aod and gains must have equal length")
        object.__setattr__(self, "aoa", aoa)
        object.__setattr__(self, "aod", aod)
        object.__setattr__(self, "gains", gains)

    def __len__(self):
        return len(self.gains)

    def permuted(self, order) -> "PathSet":
        order = np.asarray(order)
        return PathSet(self.aoa[order], self.aod[order], self.gains[order])


def _draw_separated(rng: np.random.Generator, n_paths: int, bound: float,
                    min_sep: float, max_attempts: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    aoa: list[float] = []
    aod: list[float] = []
    attempts = 0
    while len(aoa) < n_paths:
        attempts += 1
        if attempts > max_attempts * n_paths:
            raise ConfigurationError(
                f"cannot place {n_paths} paths with separation {min_sep} rad in +-{bound}")
        th, ph = rng.uniform(-bound, bound, size=2)
        if all(abs(th - t) >= min_sep and abs(ph - p) >= min_sep for t, p in zip(aoa, aod)):
            aoa.append(th)
            aod.append(ph)
    return np.array(aoa), np.array(aod)


def draw_paths(config: SystemConfig, rng: np.random.Generator) -> PathSet:
    """Draw i.i.d. uniform AoA/AoD pairs and CN(0, sigma_alpha^2) gains.

    When ``config.min_separation`` is positive, angle pairs are drawn by
    rejection so that every two paths differ by at least that much in both
    AoA and AoD.
    """
    L = config.n_paths
    bound = config.angle_range
    if config.min_separation > 0:
        aoa, aod = _draw_separated(rng, L, bound, config.min_separation)
    else:
        aoa = rng.uniform(-bound, bound, size=L)
        aod = rng.uniform(-bound, bound, size=L)
    scale = np.sqrt(config.sigma_alpha_sq / 2)
    gains = scale * (rng.standard_normal(L) + 1j * rng.standard_normal(L))
    return PathSet(aoa, aod, gains)


def scaled_gains(gains, n_bs: int, n_ms: int) -> np.ndarray:
    """Diagonal of D: ``sqrt(n_bs * n_ms / L) * gains``."""
    gains = np.asarray(gains, dtype=complex)
    return np.sqrt(n_bs * n_ms / len(gains)) * gains


def channel_factors(paths: PathSet, config: SystemConfig):
    """Return ``(A_bs, d, A_ms)`` with ``H = A_bs @ diag(d) @ A_ms^H``."""
    a_bs = steering_matrix(paths.aoa, config.n_bs, config.delta)
    a_ms = steering_matrix(paths.aod, config.n_ms, config.delta)
    return a_bs, scaled_gains(paths.gains, config.n_bs, config.n_ms), a_ms


def assemble_channel(paths: PathSet, config: SystemConfig) -> np.ndarray:
    """Sum the rank-one path contributions into the ``n_bs x n_ms`` channel matrix.

    Paths are accumulated in ascending index order so the result is
    reproducible bit-for-bit.
    """
    h = np.zeros((config.n_bs, config.n_ms), dtype=complex)
    scale = np.sqrt(config.n_bs * config.n_ms / len(paths))
    for aoa, aod, gain in zip(paths.aoa, paths.aod, paths.gains):
        a_bs = steering_vector(aoa, config.n_bs, config.delta)
        a_ms = steering_vector(aod, config.n_ms, config.delta)
        h += (scale * gain) * np.outer(a_bs, a_ms.conj())
    return h


def assemble_channel_factored(paths: PathSet, config: SystemConfig) -> np.ndarray:
    """Same channel via the compact product ``A_bs D A_ms^H``."""
    a_bs, d, a_ms = channel_factors(paths, config)
    return (a_bs * d) @ a_ms.conj().T
