"""Discrete trial/test spaces: Gram matrices, induced norms and the extremal
constants of the coefficient-to-function (synthesis) map.

The synthesis map itself is never materialized; since ||u_h||_X equals
||H^{1/2} u||_2 for the Gram matrix H, its extremal constants are the square
roots of the extreme Gram eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import densela


@dataclass(frozen=True)
class MeshMeta:
    """Minimal mesh metadata for mesh-based spaces."""

    h_min: float
    h_max: float


@dataclass(frozen=True)
class DiscreteSpace:
    """A finite-dimensional space identified by its HPD Gram matrix.

    ``mesh`` is present only for mesh-based families; spectral (Fourier)
    spaces carry a Sobolev order instead.
    """

    label: str
    gram: np.ndarray
    mesh: MeshMeta | None = None
    sobolev_order: float | None = None

    def __post_init__(self):
        g = np.asarray(self.gram)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {g.shape}")
        if not densela.is_hermitian(g):
            raise densela.NonHermitianError(f"Gram of space {self.label!r} is not Hermitian")
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]


@dataclass(frozen=True)
class SynthesisConstants:
    """Extremal constants of the synthesis map: k = norm / gamma >= 1."""

    gamma: float
    norm: float
    kappa: float


def synthesis_constants(space: DiscreteSpace) -> SynthesisConstants:
    """Lower/upper frame constants of the coefficient map and their ratio."""
    eig = densela.hermitian_eigen(space.gram, compute_vectors=False)
    lam_min = float(eig.eigenvalues[-1])
    lam_max = float(eig.eigenvalues[0])
    if lam_min <= 0.0:
        raise densela.NotPositiveDefiniteError(
            f"Gram of space {space.label!r} has eigenvalue {lam_min:.3e} <= 0"
        )
    gamma = np.sqrt(lam_min)
    norm = np.sqrt(lam_max)
    return SynthesisConstants(gamma=gamma, norm=norm, kappa=norm / gamma)


def h_inner(h: np.ndarray, u: np.ndarray, v: np.ndarray) -> complex:
    """Inner product (u, v)_H = v^H H u induced by an HPD weight H."""
    return complex(np.vdot(v, h @ u))


def h_norm(h: np.ndarray, u: np.ndarray) -> float:
    val = np.vdot(u, h @ u).real
    return float(np.sqrt(max(val, 0.0)))


def norm_x(space: DiscreteSpace, u: np.ndarray) -> float:
    """Space norm of a coefficient vector, sqrt(u^H H u)."""
    u = np.asarray(u)
    if u.shape[0] != space.dim:
        raise ValueError(f"vector length {u.shape[0]} != space dim {space.dim}")
    return h_norm(space.gram, u)


def dual_norm(space: DiscreteSpace, b: np.ndarray) -> float:
    """Dual-space norm of a load vector, ||H^{-1/2} b||_2."""
    b = np.asarray(b)
    if b.shape[0] != space.dim:
        raise ValueError(f"vector length {b.shape[0]} != space dim {space.dim}")
    l = densela.cholesky_hpd(space.gram)
    y = np.linalg.solve(l, b)
    return float(np.linalg.norm(y))
