"""Dense symmetric linear algebra: eigendecompositions, spectral matrix
functions, quadratic forms and SPD solves.

Symmetric matrices are plain float64 ndarrays that have passed through
:func:`sym_matrix`, which enforces exact symmetry and marks the storage
read-only.  Everything downstream (operators, extension solves) relies on
that contract, so construct matrices through this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "EigenDecomposition",
    "sym_matrix",
    "eigendecompose",
    "spectral_power",
    "quadratic_form",
    "solve_spd",
]

# Gross asymmetry beyond this relative level is a construction bug, not noise.
_ASYM_REL_TOL = 1e-8


def sym_matrix(entries: np.ndarray) -> np.ndarray:
    """Validate and freeze a square symmetric matrix.

    Returns an exactly symmetric, read-only float64 copy.  Tiny asymmetry
    (roundoff from prior arithmetic) is symmetrized away; anything beyond
    ``1e-8`` relative is rejected.
    """
    m = np.asarray(entries, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        raise ValueError("empty matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    scale = np.max(np.abs(m))
    asym = np.max(np.abs(m - m.T))
    if scale > 0 and asym > _ASYM_REL_TOL * scale:
        raise ValueError(f"matrix is not symmetric: max|M - M^T| = {asym:.3e}")
    out = 0.5 * (m + m.T)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and an orthonormal eigenvector basis.

    ``eigenvectors[:, j]`` belongs to ``eigenvalues[j]``.  Both arrays are
    read-only.  For degenerate eigenvalues any orthonormal basis of the
    eigenspace may appear; downstream spectral functions are basis-invariant.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        self.eigenvalues.flags.writeable = False
        self.eigenvectors.flags.writeable = False

    @property
    def n(self) -> int:
        return self.eigenvalues.size

    def reconstruct(self) -> np.ndarray:
        """Return Q diag(lambda) Q^T."""
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def eigendecompose(matrix: np.ndarray, tol: float = 1e-10) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix (LAPACK ``eigh``).

    Verifies orthogonality of the basis (``max|Q^T Q - I| <= tol``) and the
    reconstruction residual (``max|Q L Q^T - M| <= max(tol, 1e-8) * max|M|``)
    and raises with the offending residual if the backend failed to converge
    to those tolerances.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = sym_matrix(matrix)
    try:
        w, q = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigendecomposition did not converge: {exc}") from exc
    w = np.ascontiguousarray(w)
    q = np.ascontiguousarray(q)
    orth = np.max(np.abs(q.T @ q - np.eye(m.shape[0])))
    if orth > tol:
        raise RuntimeError(f"eigenvector basis not orthonormal: residual {orth:.3e} > {tol:.1e}")
    scale = max(np.max(np.abs(m)), 1.0)
    recon = np.max(np.abs((q * w) @ q.T - m))
    recon_tol = max(tol, 1e-8) * scale
    if recon > recon_tol:
        raise RuntimeError(f"eigendecomposition residual {recon:.3e} exceeds {recon_tol:.1e}")
    return EigenDecomposition(eigenvalues=w, eigenvectors=q)


def spectral_power(eigen: EigenDecomposition, s: float) -> np.ndarray:
    """Matrix power M^s = Q diag(lambda^s) Q^T through a decomposition.

    Requires strictly positive eigenvalues for non-integer exponents; the
    exponent range of interest here is 0 <= s <= 1.
    """
    if s < 0:
        raise ValueError("exponent must be nonnegative")
    if s != round(s) and eigen.eigenvalues[0] <= 0:
        raise ValueError(
            f"fractional power needs positive spectrum; min eigenvalue = {eigen.eigenvalues[0]:.3e}"
        )
    q = eigen.eigenvectors
    return sym_matrix((q * eigen.eigenvalues**s) @ q.T)


def quadratic_form(matrix: np.ndarray, u: np.ndarray) -> float:
    """The scalar u^T M u."""
    m = np.asarray(matrix, dtype=float)
    v = np.asarray(u, dtype=float)
    if v.ndim != 1 or m.shape != (v.size, v.size):
        raise ValueError(f"dimension mismatch: matrix {m.shape}, vector {v.shape}")
    return float(v @ (m @ v))


def solve_spd(matrix: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Solve M x = b for symmetric positive definite M via Cholesky.

    One step of iterative refinement is applied if needed; the final
    residual must satisfy ``||Mx - b|| <= tol * ||b||``.
    """
    m = sym_matrix(matrix)
    rhs = np.asarray(b, dtype=float)
    if rhs.shape != (m.shape[0],):
        raise ValueError(f"dimension mismatch: matrix {m.shape}, rhs {rhs.shape}")
    try:
        factor = scipy.linalg.cho_factor(m, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError(f"matrix is not positive definite: {exc}") from exc
    x = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros_like(rhs)
    res = rhs - m @ x
    if np.linalg.norm(res) > tol * bnorm:
        x = x + scipy.linalg.cho_solve(factor, res, check_finite=False)
        res = rhs - m @ x
    resnorm = float(np.linalg.norm(res))
    if resnorm > tol * bnorm:
        raise RuntimeError(f"SPD solve residual {resnorm:.3e} exceeds {tol:.1e} * ||b||")
    return x
