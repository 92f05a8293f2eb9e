"""
Dense matrix kernels for the reservoir simulator.

Everything here is a pure function of numpy arrays. Operators are complex128,
readout design matrices are float64. Eigenvalues are returned ascending and
singular values descending so that reports do not depend on LAPACK ordering.
"""
import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy import linalg as sla

from .exceptions import NumericalError, ShapeError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
IMAG_TOL = 1e-10
AUTO_RTOL = 1e-12


def as_matrix(a, dtype=np.complex128):
    m = np.asarray(a, dtype=dtype)
    if m.ndim != 2:
        raise ShapeError({"matrix": f"expected a 2-D array, got shape {m.shape}"})
    return m


def hermiticity_error(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def unitarity_error(u) -> float:
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def kron(a, b, *more):
    """Kronecker product of two or more matrices, left factor most significant."""
    factors = [as_matrix(m) for m in (a, b, *more)]
    return reduce(np.kron, factors)


@dataclass(frozen=True)
class EigDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def propagator(self, t: float):
        """e^{-iHt} for the decomposed H; one decomposition serves every t."""
        v = self.eigenvectors
        phases = np.exp(-1j * self.eigenvalues * float(t))
        return (v * phases) @ v.conj().T


def herm_eig(a) -> EigDecomposition:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError({"matrix": f"eigendecomposition needs a square matrix, got {a.shape}"})
    deviation = hermiticity_error(a)
    if deviation >= HERMITIAN_TOL * max(1.0, float(np.max(np.abs(a), initial=0.0))):
        raise NumericalError(f"matrix is not Hermitian: max|A - A^H| = {deviation:.3e}")

    # eigh already sorts ascending; symmetrize so roundoff in the input cannot leak in
    w, v = sla.eigh(0.5 * (a + a.conj().T))
    logger.debug("herm_eig: dim=%d spectrum=[%.6g, %.6g]", a.shape[0], w[0] if w.size else 0.0, w[-1] if w.size else 0.0)
    return EigDecomposition(eigenvalues=np.asarray(w, dtype=np.float64), eigenvectors=v)


def unitary_from_hamiltonian(h, t: float):
    if not np.isfinite(t):
        raise NumericalError(f"evolution time must be finite, got {t!r}")
    return herm_eig(h).propagator(t)


@dataclass(frozen=True)
class LeastSquaresSolution:
    weights: np.ndarray
    effective_rank: int
    singular_values: np.ndarray
    tolerance_used: float


def _svd(design):
    design = np.asarray(design, dtype=np.float64)
    if design.ndim != 2 or design.shape[0] < 1 or design.shape[1] < 1:
        raise ShapeError({"design": f"design matrix must be K x LM with K, LM >= 1, got shape {design.shape}"})
    if not np.all(np.isfinite(design)):
        raise NumericalError("design matrix contains non-finite values")
    u, s, vt = np.linalg.svd(design, full_matrices=False)
    return design, u, s, vt


def _cutoff(design, s, tolerance):
    if tolerance is None:
        smax = float(s[0]) if s.size else 0.0
        return max(design.shape) * smax * AUTO_RTOL
    if tolerance < 0 or not np.isfinite(tolerance):
        raise ShapeError({"tolerance": f"tolerance must be a finite value >= 0, got {tolerance!r}"})
    return float(tolerance)


def pinv(design, tolerance=None):
    """Moore-Penrose inverse R+ with the same cutoff rule as least_squares_pinv."""
    design, u, s, vt = _svd(design)
    tol = _cutoff(design, s, tolerance)
    keep = s > tol
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (vt.T * s_inv) @ u.T


def least_squares_pinv(design, targets, tolerance=None) -> LeastSquaresSolution:
    """
    Minimum-norm least-squares weights for ``design @ w ~ targets``.

    ``tolerance`` is an absolute singular-value cutoff; ``None`` selects
    ``max(K, LM) * s_max * 1e-12``. An all-zero design yields zero weights
    with rank 0.
    """
    design, u, s, vt = _svd(design)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if targets.shape[0] != design.shape[0]:
        raise ShapeError({"targets": f"expected {design.shape[0]} targets, got {targets.shape[0]}"})

    tol = _cutoff(design, s, tolerance)
    keep = s > tol
    rank = int(np.count_nonzero(keep))
    coeffs = np.zeros_like(s)
    coeffs[keep] = (u.T[keep] @ targets) / s[keep]
    weights = vt.T @ coeffs

    logger.debug("least_squares_pinv: shape=%s rank=%d tol=%.3e", design.shape, rank, tol)
    return LeastSquaresSolution(
        weights=weights,
        effective_rank=rank,
        singular_values=s.copy(),
        tolerance_used=tol,
    )


def trace_product(rho, obs) -> float:
    rho = as_matrix(rho)
    obs = as_matrix(obs)
    if rho.shape != obs.shape or rho.shape[0] != rho.shape[1]:
        raise ShapeError({"obs": f"dimension mismatch: rho {rho.shape} vs observable {obs.shape}"})
    # Tr(AB) = sum_ij A_ij B_ji
    value = np.sum(rho * obs.T)
    scale = max(1.0, float(np.max(np.abs(rho))) * float(np.max(np.abs(obs), initial=0.0)) * rho.shape[0])
    if abs(value.imag) > IMAG_TOL * scale:
        raise NumericalError(f"Tr(rho O) has imaginary part {value.imag:.3e}; inputs are not Hermitian")
    return float(value.real)
