"""2D unitary ESPRIT for joint, automatically paired AoA/AoD estimation.

The pipeline operates on the effective channel ``H_bar`` (``n_r x n_t``):

1. spatial smoothing into a block-Hankel matrix,
2. forward-backward extension ``[Hk, J Hk*]``,
3. real-valued transform with left J-real unitary matrices,
4. dominant left singular subspace,
5. joint diagonalization of the two real shift equations through one complex
   eigendecomposition, whose eigenvalues ``tan(pi d sin(aod)) + j tan(pi d sin(aoa))``
   carry both angles of a path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .errors import (AngleDomainError, ConfigurationError, EstimationError,
                     InternalConsistencyError)

REALNESS_TOL = 1e-10


def _as_array(h_bar) -> np.ndarray:
    return np.asarray(getattr(h_bar, "h_bar", h_bar))


def build_hankel(h_bar, m1: int, m2: int) -> np.ndarray:
    """Block-Hankel matrix of shifted submatrices of ``h_bar``.

    Block-row ``j`` (1..m1) and block-column ``i`` (1..m2) hold the submatrix
    with rows ``i .. n_r - m2 + i`` and columns ``j .. n_t - m1 + j``.  Row
    shifts therefore run along the block-columns and column shifts along the
    block-rows.

    Returns:
        Complex array of shape ``(m1 (n_r - m2 + 1), m2 (n_t - m1 + 1))``.
    """
    h = _as_array(h_bar)
    n_r, n_t = h.shape
    if not 2 <= m1 <= n_t:
        raise ConfigurationError(f"m1 must lie in [2, {n_t}], got {m1}")
    if not 1 <= m2 <= n_r - 1:
        raise ConfigurationError(f"m2 must lie in [1, {n_r - 1}], got {m2}")
    p = n_r - m2 + 1
    c = n_t - m1 + 1
    return np.block([[h[i:i + p, j:j + c] for i in range(m2)] for j in range(m1)])


def exchange_matrix(n: int) -> np.ndarray:
    return np.eye(n)[::-1]


def extend_forward_backward(hankel: np.ndarray) -> np.ndarray:
    """``[H, J H*]`` with J the row-reversal exchange matrix."""
    hankel = np.asarray(hankel)
    return np.hstack([hankel, hankel[::-1].conj()])


def q_matrix(n: int) -> np.ndarray:
    """Sparse unitary left J-real matrix (``J Q* = Q``) of size ``n``."""
    if n < 1:
        raise ConfigurationError("q_matrix needs n >= 1")
    k = n // 2
    eye = np.eye(k)
    rev = eye[::-1]
    if n % 2 == 0:
        return np.block([[eye, 1j * eye], [rev, -1j * rev]]) / np.sqrt(2)
    col = np.zeros((k, 1))
    mid = np.full((1, 1), np.sqrt(2))
    return np.block([[eye, col, 1j * eye],
                     [col.T, mid, col.T],
                     [rev, col, -1j * rev]]) / np.sqrt(2)


def left_transform(m1: int, p: int) -> np.ndarray:
    """``T_L = Q_{m1}^H kron Q_p^H`` as a dense matrix."""
    return np.kron(q_matrix(m1).conj().T, q_matrix(p).conj().T)


def right_transform(n: int) -> np.ndarray:
    """``T_R = [[I, jI], [I, -jI]]`` with ``n x n`` blocks."""
    eye = np.eye(n)
    return np.block([[eye, 1j * eye], [eye, -1j * eye]])


def real_transform(extended: np.ndarray, m1: int, n_r: int, m2: int) -> np.ndarray:
    """Map the forward-backward extended matrix to its real-valued form ``T_L He T_R``.

    The Kronecker structure of ``T_L`` and the block structure of ``T_R`` are
    applied directly instead of forming either matrix.

    Raises:
        InternalConsistencyError: if the result is not real to within
            ``REALNESS_TOL`` relative to its Frobenius norm.
    """
    extended = np.asarray(extended)
    p = n_r - m2 + 1
    rows, cols = extended.shape
    if rows != m1 * p or cols % 2:
        raise ConfigurationError(
            f"extended matrix shape {extended.shape} does not match m1 = {m1}, n_r - m2 + 1 = {p}")
    half = cols // 2
    left, right = extended[:, :half], extended[:, half:]
    x = np.hstack([left + right, 1j * (left - right)])
    x = (q_matrix(m1).conj().T @ x.reshape(m1, p * cols)).reshape(m1, p, cols)
    x = np.matmul(q_matrix(p).conj().T, x).reshape(rows, cols)
    norm = np.linalg.norm(x)
    residue = np.abs(x.imag).max(initial=0.0)
    if residue > REALNESS_TOL * max(norm, np.finfo(float).tiny):
        raise InternalConsistencyError(
            f"real transform left imaginary residue {residue:.3g} (norm {norm:.3g})")
    return np.ascontiguousarray(x.real)


def signal_subspace(real_form: np.ndarray, n_paths: int, return_singular_values: bool = False):
    """Orthonormal basis of the ``n_paths`` dominant left singular vectors."""
    rows, cols = real_form.shape
    if not 1 <= n_paths <= min(rows, cols):
        raise ConfigurationError(
            f"n_paths = {n_paths} exceeds the rank bound min{real_form.shape}")
    u, s, _ = scipy.linalg.svd(real_form, full_matrices=False, check_finite=False)
    basis = u[:, :n_paths]
    return (basis, s) if return_singular_values else basis


def estimate_model_order(singular_values, threshold: float = 1e-3) -> int:
    """Count singular values above ``threshold`` times the largest one.

    A simple model-order selection hook; estimation itself takes the path
    count as an input.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0:
        return 0
    return int(np.count_nonzero(s > threshold * s[0]))


class Selections(NamedTuple):
    """Real and imaginary parts of the two transformed selection matrices."""

    theta_re: np.ndarray
    theta_im: np.ndarray
    phi_re: np.ndarray
    phi_im: np.ndarray


def _shift_selection(n: int, last: bool) -> np.ndarray:
    """``Q_{n-1}^H K Q_n`` with K selecting the last (or first) ``n - 1`` elements."""
    k = np.eye(n)[1:] if last else np.eye(n)[:-1]
    return q_matrix(n - 1).conj().T @ k @ q_matrix(n)


def selection_matrices(m1: int, n_r: int, m2: int) -> Selections:
    """Transformed selection matrices for both shift-invariance directions.

    The receive (AoA) direction is the inner index of the Hankel rows and uses
    ``I_{m1} kron (Q^H [0 I] Q)``.  The transmit (AoD) direction is the outer
    index; because the MS response enters the Hankel rows conjugated, it uses
    the first-element selection ``(Q^H [I 0] Q) kron I_p`` so that both
    eigenvalue parts decode with the same sign.
    """
    if m1 < 2:
        raise ConfigurationError("m1 must be >= 2")
    p = n_r - m2 + 1
    if p < 2:
        raise ConfigurationError("n_r - m2 must be >= 1")
    e_theta = np.kron(np.eye(m1), _shift_selection(p, last=True))
    e_phi = np.kron(_shift_selection(m1, last=False), np.eye(p))
    return Selections(e_theta.real.copy(), e_theta.imag.copy(),
                      e_phi.real.copy(), e_phi.imag.copy())


@dataclass(frozen=True)
class AngleEstimates:
    """Paired angle estimates.

    Attributes:
        aoa: estimated AoAs (radians), one per eigenvalue.
        aod: estimated AoDs (radians), paired element-wise with ``aoa``.
        eigenvalues: ``tan(pi d sin(aod)) + j tan(pi d sin(aoa))`` per path.
    """

    aoa: np.ndarray
    aod: np.ndarray
    eigenvalues: np.ndarray

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.aoa.tolist(), self.aod.tolist()))

    def __len__(self):
        return len(self.aoa)

    def permuted(self, order) -> "AngleEstimates":
        order = np.asarray(order)
        return AngleEstimates(self.aoa[order], self.aod[order], self.eigenvalues[order])


def decode_angle(tangent, delta: float) -> np.ndarray:
    """Invert ``tan(pi delta sin(angle))``.

    Raises:
        AngleDomainError: if the implied ``sin(angle)`` lies outside (-1, 1).
    """
    sine = np.arctan(np.asarray(tangent, dtype=float)) / (np.pi * delta)
    if not np.all(np.abs(sine) < 1):
        raise AngleDomainError(f"decoded sin(angle) outside (-1, 1): {sine}")
    return np.arcsin(sine)


def _shift_operator(e_re: np.ndarray, e_im: np.ndarray, basis: np.ndarray, label: str) -> np.ndarray:
    lhs = e_re @ basis
    rhs = e_im @ basis
    sol, _, rank, sv = np.linalg.lstsq(lhs, rhs, rcond=None)
    if rank < basis.shape[1]:
        cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
        raise EstimationError(
            f"{label} shift equation is rank deficient (rank {rank} < {basis.shape[1]})",
            condition_number=float(cond))
    return sol


def joint_angle_estimation(u_sig: np.ndarray, selections: Selections, delta: float) -> AngleEstimates:
    """Solve both real shift equations and pair the angles via one complex EVD.

    ``Psi = pinv(E_phi,R U) E_phi,I U + j pinv(E_theta,R U) E_theta,I U``
    shares its eigenvectors between the real and imaginary parts, so each
    eigenvalue holds the AoD tangent in its real part and the AoA tangent in
    its imaginary part.
    """
    psi_theta = _shift_operator(selections.theta_re, selections.theta_im, u_sig, "AoA")
    psi_phi = _shift_operator(selections.phi_re, selections.phi_im, u_sig, "AoD")
    eigvals = np.linalg.eigvals(psi_phi + 1j * psi_theta)
    return AngleEstimates(
        aoa=decode_angle(eigvals.imag, delta),
        aod=decode_angle(eigvals.real, delta),
        eigenvalues=eigvals,
    )


@dataclass
class EspritWorkspace:
    """Intermediate matrices of one estimation, kept for inspection."""

    m1: int
    p: int
    hankel: np.ndarray
    extended: np.ndarray
    real_form: np.ndarray
    selections: Selections
    u_sig: np.ndarray
    singular_values: np.ndarray
    estimates: AngleEstimates

    @property
    def t_left(self) -> np.ndarray:
        return left_transform(self.m1, self.p)

    @property
    def t_right(self) -> np.ndarray:
        return right_transform(self.extended.shape[1] // 2)

    @property
    def psi(self) -> np.ndarray:
        s, u = self.selections, self.u_sig
        theta = np.linalg.pinv(s.theta_re @ u) @ (s.theta_im @ u)
        phi = np.linalg.pinv(s.phi_re @ u) @ (s.phi_im @ u)
        return phi + 1j * theta


def unitary_esprit(h_bar, m1: int, m2: int, n_paths: int, delta: float,
                   return_workspace: bool = False):
    """Run the full estimator on an effective channel.

    Args:
        h_bar: effective channel matrix (or ``EffectiveChannel``), ``n_r x n_t``.
        m1, m2: stacking parameters.
        n_paths: number of paths to extract.
        delta: antenna spacing in wavelengths.
        return_workspace: also return the ``EspritWorkspace``.

    Returns:
        ``AngleEstimates`` (and the workspace when requested).
    """
    h = _as_array(h_bar)
    n_r = h.shape[0]
    hankel = build_hankel(h, m1, m2)
    extended = extend_forward_backward(hankel)
    real_form = real_transform(extended, m1, n_r, m2)
    u_sig, s = signal_subspace(real_form, n_paths, return_singular_values=True)
    sel = selection_matrices(m1, n_r, m2)
    estimates = joint_angle_estimation(u_sig, sel, delta)
    if return_workspace:
        return estimates, EspritWorkspace(m1, n_r - m2 + 1, hankel, extended, real_form, sel, u_sig, s, estimates)
    return estimates
