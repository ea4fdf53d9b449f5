"""On-grid orthogonal matching pursuit baseline.

The dictionary pairs every virtual AoA with every virtual AoD of a uniform
grid in the sine domain.  Atoms share the measurement structure of the gain
sensing matrix, ``(a_ms^H F~)^T kron (W~^H a_bs)``, so correlations reduce to
``Rx^H R conj(Tx)`` and the ``G^2`` atoms are never materialized unless asked for.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import khatri_rao

from .channel import steering_matrix
from .config import SystemConfig
from .errors import ConfigurationError, SingularityError
from .reconstruction import ChannelEstimate
from .training import EffectiveChannel, TrainingPlan


@dataclass(frozen=True)
class GridDictionary:
    """Virtual-angle dictionary for one training plan.

    Attributes:
        g: grid points per angle dimension.
        virtual_aoa, virtual_aod: grid angles (radians).
        rx: ``W~^H A_bs,grid`` (``n_r x g``).
        tx: ``(A_ms,grid^H F~)^T`` (``n_t x g``).
        n_bs, n_ms, delta: array geometry for reconstruction.
    """

    g: int
    virtual_aoa: np.ndarray
    virtual_aod: np.ndarray
    rx: np.ndarray
    tx: np.ndarray
    n_bs: int
    n_ms: int
    delta: float

    @property
    def n_atoms(self) -> int:
        return self.g * self.g

    def pair(self, index: int) -> tuple[int, int]:
        """``(aoa_index, aod_index)`` of a flat atom index."""
        return divmod(int(index), self.g)

    def atom_norms(self) -> np.ndarray:
        return np.outer(np.linalg.norm(self.rx, axis=0), np.linalg.norm(self.tx, axis=0))

    def raw_atoms(self, indices) -> np.ndarray:
        """Unnormalized atoms ``tx[:, q] kron rx[:, p]`` for the given flat indices."""
        p, q = np.divmod(np.asarray(indices, dtype=int), self.g)
        return khatri_rao(self.tx[:, q], self.rx[:, p])

    @property
    def atoms(self) -> np.ndarray:
        """Full unit-norm sensing matrix, ``n_r n_t x g^2`` (flat index ``p g + q``)."""
        idx = np.arange(self.n_atoms)
        a = self.raw_atoms(idx)
        return a / np.linalg.norm(a, axis=0)


def sine_grid(g: int, angle_range: float) -> np.ndarray:
    """``g`` angles uniformly spaced in sine over ``[-angle_range, angle_range]``."""
    s = np.sin(angle_range)
    return np.arcsin(np.linspace(-s, s, g))


def build_dictionary(config: SystemConfig, g: int, plan: TrainingPlan) -> GridDictionary:
    if g < 2:
        raise ConfigurationError("grid size must be >= 2")
    grid = sine_grid(g, config.angle_range)
    a_bs = steering_matrix(grid, config.n_bs, config.delta)
    a_ms = steering_matrix(grid, config.n_ms, config.delta)
    return GridDictionary(
        g=g,
        virtual_aoa=grid,
        virtual_aod=grid.copy(),
        rx=plan.w_agg.conj().T @ a_bs,
        tx=(a_ms.conj().T @ plan.f_agg).T,
        n_bs=config.n_bs,
        n_ms=config.n_ms,
        delta=config.delta,
    )


@dataclass(frozen=True)
class PursuitResult:
    support: list
    gains: np.ndarray
    residual_norms: list


def omp_pursuit(h_bar, dictionary: GridDictionary, n_iter: int,
                rank_tol: float = 1e-10) -> PursuitResult:
    """Greedy atom selection with a least-squares refit after every step.

    The refit keeps an incrementally updated QR factorization of the selected
    atoms (Gram-Schmidt with one re-orthogonalization pass).

    Returns:
        Flat atom indices in selection order, their fitted (unnormalized-atom)
        gains and the residual norm before the first and after every step.
    """
    h = np.asarray(getattr(h_bar, "h_bar", h_bar))
    if not 0 <= n_iter <= dictionary.n_atoms:
        raise ConfigurationError(f"n_iter must lie in [0, {dictionary.n_atoms}]")
    target = h.reshape(-1, order="F")
    norms = dictionary.atom_norms()
    rx_h = dictionary.rx.conj().T
    tx_c = dictionary.tx.conj()
    support: list[int] = []
    # orthonormal basis stored as rows, plus its conjugate
    q = np.zeros((n_iter, target.size), dtype=complex)
    qc = np.zeros_like(q)
    r = np.zeros((n_iter, n_iter), dtype=complex)
    proj = np.zeros(n_iter, dtype=complex)
    residual = target
    history = [float(np.linalg.norm(target))]
    for k in range(n_iter):
        corr = np.abs(rx_h @ residual.reshape(h.shape, order="F") @ tx_c) / norms
        corr.flat[support] = -1.0
        best = int(np.argmax(corr))
        support.append(best)
        atom = dictionary.raw_atoms([best])[:, 0]
        v = atom.copy()
        coef = np.zeros(k, dtype=complex)
        for _ in range(2):
            c = qc[:k] @ v
            v -= c @ q[:k]
            coef += c
        v_norm = np.linalg.norm(v)
        if v_norm <= rank_tol * np.linalg.norm(atom):
            raise SingularityError("OMP support least squares is rank deficient",
                                   indices=support)
        q[k] = v / v_norm
        qc[k] = q[k].conj()
        r[:k, k] = coef
        r[k, k] = v_norm
        proj[k] = qc[k] @ target
        residual = target - proj[:k + 1] @ q[:k + 1]
        history.append(float(np.linalg.norm(residual)))
    gains = scipy.linalg.solve_triangular(r, proj) if n_iter else np.zeros(0, dtype=complex)
    return PursuitResult(support, gains, history)


def omp_estimate(h_bar: EffectiveChannel | np.ndarray, dictionary: GridDictionary,
                 n_iter: int) -> ChannelEstimate:
    """OMP channel estimate rebuilt at the selected grid angles."""
    result = omp_pursuit(h_bar, dictionary, n_iter)
    idx = np.array(result.support, dtype=int)
    p, q = np.divmod(idx, dictionary.g)
    a_bs = steering_matrix(dictionary.virtual_aoa[p], dictionary.n_bs, dictionary.delta)
    a_ms = steering_matrix(dictionary.virtual_aod[q], dictionary.n_ms, dictionary.delta)
    h_hat = (a_bs * result.gains) @ a_ms.conj().T
    return ChannelEstimate(h_hat, result.gains, a_bs, a_ms)
