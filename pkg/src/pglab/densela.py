"""Dense complex linear-algebra kernels.

All operations are pure functions on immutable ndarrays and are safe to call
concurrently.  Dimensions are capped at desk scale (``config.MAX_DENSE_DIM``);
storage is always full dense.  The decompositions are backed by LAPACK through
numpy/scipy, which is deterministic for a fixed input.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import config


class LinearAlgebraError(Exception):
    """Base class for kernel failures."""


class NonSquareError(LinearAlgebraError):
    pass


class NonHermitianError(LinearAlgebraError):
    pass


class NotPositiveDefiniteError(LinearAlgebraError):
    pass


class SingularMatrixError(LinearAlgebraError):
    pass


class NoConvergenceError(LinearAlgebraError):
    """Eigenvalue iteration failed to converge within the backend's cap.

    LAPACK does not expose partial spectra on failure, so no partial result is
    attached; at desk scale this error is not expected to trigger.
    """


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues (ordered as documented by the producing operation) plus
    optional eigenvectors stored column-wise."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None = None


@dataclass(frozen=True)
class SvdResult:
    """Singular values in non-increasing order with optional factors U, V^H."""

    singular_values: np.ndarray
    u: np.ndarray | None = None
    vh: np.ndarray | None = None


def _as_square(m) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > config.MAX_DENSE_DIM:
        raise LinearAlgebraError(
            f"dimension {m.shape[0]} exceeds desk-scale cap {config.MAX_DENSE_DIM}"
        )
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag * 1.0)):
        raise LinearAlgebraError("matrix has non-finite entries")
    return m


def is_hermitian(m: np.ndarray, rtol: float = config.HERMITIAN_RTOL) -> bool:
    m = np.asarray(m)
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return True
    return np.linalg.norm(m - m.conj().T) <= rtol * scale


def hermitian_eigen(m, compute_vectors: bool = True) -> EigenResult:
    """Spectral decomposition of a Hermitian matrix.

    Eigenvalues are real and returned in descending order; eigenvectors (when
    requested) are unitary columns ordered accordingly.
    """
    m = _as_square(m)
    if not is_hermitian(m):
        raise NonHermitianError("matrix is not Hermitian within tolerance")
    if compute_vectors:
        vals, vecs = np.linalg.eigh(m)
        order = np.argsort(vals)[::-1]
        return EigenResult(vals[order], vecs[:, order])
    vals = np.linalg.eigvalsh(m)
    return EigenResult(vals[::-1])


def general_eigen(m, compute_vectors: bool = False, validate: bool = False) -> EigenResult:
    """Full spectrum of a general square matrix (Hessenberg + shifted QR).

    Eigenvalues are ordered by descending modulus, ties broken by descending
    real then imaginary part for determinism.  With ``validate=True`` each
    eigenvalue is checked against sigma_min(m - lambda I) <= tol * ||m||_2.
    """
    m = _as_square(m)
    try:
        if compute_vectors:
            vals, vecs = np.linalg.eig(m)
        else:
            vals = np.linalg.eigvals(m)
            vecs = None
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    order = np.lexsort((-vals.imag, -vals.real, -np.abs(vals)))
    vals = vals[order]
    if vecs is not None:
        vecs = vecs[:, order]
    if validate:
        scale = np.linalg.norm(m, 2)
        for lam in vals:
            smin = np.linalg.svd(m - lam * np.eye(m.shape[0]), compute_uv=False)[-1]
            if smin > config.EIGEN_VERIFY_RTOL * max(scale, 1e-300):
                raise NoConvergenceError(
                    f"eigenvalue {lam} fails the singularity check: "
                    f"sigma_min={smin:.3e} > {config.EIGEN_VERIFY_RTOL:.0e}*||m||"
                )
    return EigenResult(vals, vecs)


def svd(m, compute_factors: bool = False) -> SvdResult:
    """Singular value decomposition of a rectangular matrix."""
    m = np.asarray(m)
    if m.ndim != 2:
        raise LinearAlgebraError(f"expected a matrix, got ndim {m.ndim}")
    if not np.all(np.isfinite(np.abs(m))):
        raise LinearAlgebraError("matrix has non-finite entries")
    if compute_factors:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        return SvdResult(s, u, vh)
    return SvdResult(np.linalg.svd(m, compute_uv=False))


def cholesky_hpd(m) -> np.ndarray:
    """Lower-triangular Cholesky factor L with L L^H = m.

    Raises NotPositiveDefiniteError when a pivot is non-positive (and
    NonHermitianError when the input is not Hermitian to begin with).
    """
    m = _as_square(m)
    if not is_hermitian(m):
        raise NonHermitianError("Cholesky requires a Hermitian matrix")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError(str(exc)) from exc


def solve_linear(m, rhs) -> np.ndarray:
    """Solve m x = rhs by partially pivoted LU.

    Raises SingularMatrixError when a pivot falls below the configured
    threshold relative to ||m||_F.
    """
    m = _as_square(m)
    rhs = np.asarray(rhs)
    lu, piv = _lu_factor(m)
    return scipy.linalg.lu_solve((lu, piv), rhs)


def _lu_factor(m: np.ndarray):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise SingularMatrixError(str(exc)) from exc
    pivots = np.abs(np.diag(lu))
    threshold = config.PIVOT_RTOL * max(np.linalg.norm(m), 1e-300)
    if pivots.min(initial=np.inf) < threshold:
        raise SingularMatrixError(
            f"pivot {pivots.min():.3e} below threshold {threshold:.3e}"
        )
    return lu, piv


class LuSolver:
    """Reusable LU factorization for repeated solves against one matrix."""

    def __init__(self, m):
        m = _as_square(m)
        self.shape = m.shape
        self._factors = _lu_factor(m)

    def solve(self, rhs) -> np.ndarray:
        return scipy.linalg.lu_solve(self._factors, np.asarray(rhs))


def spectral_norm(m) -> float:
    m = np.asarray(m)
    if m.size == 0 or not np.any(m):
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def kappa_2(m) -> float:
    """Euclidean condition number sigma_max / sigma_min."""
    s = svd(m).singular_values
    if s[-1] == 0.0:
        raise SingularMatrixError("matrix is singular: sigma_min = 0")
    return float(s[0] / s[-1])


def kappa_s(m) -> float:
    """Spectral condition number |lambda|_max / |lambda|_min."""
    mods = np.abs(general_eigen(m).eigenvalues)
    if mods[-1] == 0.0:
        raise SingularMatrixError("matrix is singular: zero eigenvalue")
    return float(mods[0] / mods[-1])


def _is_diagonal(m: np.ndarray) -> bool:
    return np.count_nonzero(m - np.diag(np.diag(m))) == 0


def hermitian_sqrt_pair(m) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian square root of an HPD matrix and its inverse, (m^1/2, m^-1/2).

    Diagonal inputs take a closed-form fast path; otherwise the root is built
    from the spectral decomposition.
    """
    m = _as_square(m)
    if _is_diagonal(m):
        d = np.diag(m).real
        if d.min(initial=np.inf) <= 0.0:
            raise NotPositiveDefiniteError("diagonal entry <= 0")
        r = np.sqrt(d)
        return np.diag(r).astype(m.dtype), np.diag(1.0 / r).astype(m.dtype)
    eig = hermitian_eigen(m)
    if eig.eigenvalues[-1] <= 0.0:
        raise NotPositiveDefiniteError(
            f"smallest eigenvalue {eig.eigenvalues[-1]:.3e} is not positive"
        )
    r = np.sqrt(eig.eigenvalues)
    v = eig.eigenvectors
    root = (v * r) @ v.conj().T
    inv_root = (v / r) @ v.conj().T
    return root, inv_root
