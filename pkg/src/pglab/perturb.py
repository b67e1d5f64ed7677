"""Controlled perturbations of operators and load vectors.

A level-nu perturbation of an operator A is any A' whose deviation, measured
in the natural operator norm between the spaces and relative to the inf-sup
constant of A, stays below nu:

    sigma_max(Hy^-1/2 (A - A') Hx^-1/2) <= nu * gamma_A.

The constructions here enforce the budget by exact spectral rescaling of a
raw direction (so the admissibility inequality is tight), except for SVD
truncation which searches the rank frontier instead.  Load vectors are
perturbed analogously in the dual norm.  Everything is deterministic in
(seed, mode, level).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import densela
from .problems import GalerkinOperator
from .rng import Lcg64
from .spaces import DiscreteSpace

MODES = ("denseRandom", "svdTruncation", "entryDrop")


class TruncationInfeasibleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PerturbationSpec:
    level: float
    mode: str = "denseRandom"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.level < 1.0:
            raise ValueError(f"perturbation level must lie in [0, 1), got {self.level}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class PerturbationMeasure:
    nu_actual: float


@dataclass(frozen=True)
class PerturbationResult:
    op: GalerkinOperator
    nu_actual: float
    truncation_infeasible: bool = False


def _hat(op: GalerkinOperator, m: np.ndarray) -> np.ndarray:
    _, inv_x = densela.hermitian_sqrt_pair(op.domain.gram)
    _, inv_y = densela.hermitian_sqrt_pair(op.range_dual.gram)
    return inv_y @ m @ inv_x


def measure_perturbation(original: GalerkinOperator, perturbed: GalerkinOperator
                         ) -> PerturbationMeasure:
    """Achieved level of a perturbed operator relative to the original."""
    if (original.domain.label != perturbed.domain.label
            or original.range_dual.label != perturbed.range_dual.label):
        raise ValueError("operators live on different spaces")
    diff = perturbed.matrix - original.matrix
    if not np.any(diff):
        return PerturbationMeasure(0.0)
    nu = densela.spectral_norm(_hat(original, diff)) / original.gamma
    return PerturbationMeasure(float(nu))


def perturb_operator(op: GalerkinOperator, spec: PerturbationSpec) -> PerturbationResult:
    """Perturbed operator with achieved level <= spec.level.

    denseRandom and entryDrop rescale their raw direction so the level is hit
    exactly; svdTruncation keeps the smallest rank whose discarded tail stays
    within budget and flags infeasibility (returning an exact copy) when even
    dropping a single singular direction overshoots.  Hermitian inputs receive
    Hermitian perturbations, so elliptic operators stay elliptic.
    """
    if spec.level == 0.0:
        return PerturbationResult(op, 0.0)
    if spec.mode == "svdTruncation":
        return _truncate(op, spec)
    if spec.mode == "denseRandom":
        raw = Lcg64(spec.seed).complex_matrix(op.dim, op.dim)
        if not np.iscomplexobj(op.matrix) or np.all(op.matrix.imag == 0.0):
            raw = raw.real.astype(complex)
    else:  # entryDrop
        raw = _entry_drop_direction(op, spec)
    hermitian = densela.is_hermitian(op.matrix)
    if hermitian:
        raw = 0.5 * (raw + raw.conj().T)
    scale = densela.spectral_norm(_hat(op, raw))
    if scale == 0.0:
        return PerturbationResult(op, 0.0)
    e = (spec.level * op.gamma / scale) * raw
    new_matrix = op.matrix + e
    new_op = GalerkinOperator.assemble(new_matrix, op.domain, op.range_dual)
    return PerturbationResult(new_op, spec.level)


def _truncate(op: GalerkinOperator, spec: PerturbationSpec) -> PerturbationResult:
    ahat = _hat(op, op.matrix)
    res = densela.svd(ahat, compute_factors=True)
    s, u, vh = res.singular_values, res.u, res.vh
    budget = spec.level * op.gamma
    n = len(s)
    # smallest kept rank whose discarded tail norm sigma_{r+1} fits the budget
    kept = n
    for r in range(n):
        tail = s[r] if r < n else 0.0
        if tail <= budget:
            kept = r
            break
    if kept >= n:
        warnings.warn(
            f"rank-{n - 1} truncation already exceeds level {spec.level}; "
            "returning the operator unchanged",
            TruncationInfeasibleWarning,
        )
        return PerturbationResult(op, 0.0, truncation_infeasible=True)
    sx, _ = densela.hermitian_sqrt_pair(op.domain.gram)
    sy, _ = densela.hermitian_sqrt_pair(op.range_dual.gram)
    truncated_hat = (u[:, :kept] * s[:kept]) @ vh[:kept, :]
    new_matrix = sy @ truncated_hat @ sx
    nu_actual = float(s[kept] / op.gamma) if kept < n else 0.0
    new_op = GalerkinOperator.assemble(new_matrix, op.domain, op.range_dual)
    return PerturbationResult(new_op, nu_actual)


def _entry_drop_direction(op: GalerkinOperator, spec: PerturbationSpec) -> np.ndarray:
    """Direction that zeroes the smallest-magnitude entries of A, consuming
    the norm budget; the number of dropped entries is the largest feasible one
    (binary search plus a downward walk, since the induced norm is monotone in
    practice but not provably so)."""
    a = op.matrix
    n = op.dim
    hermitian = densela.is_hermitian(a)
    idx = [(i, j) for i in range(n) for j in range(n) if a[i, j] != 0]
    if hermitian:
        idx = [(i, j) for (i, j) in idx if i <= j]  # drop conjugate pairs together
    if not idx:
        return np.zeros_like(a)
    idx.sort(key=lambda ij: (abs(a[ij]), ij))
    budget = spec.level * op.gamma

    def direction(count: int) -> np.ndarray:
        e = np.zeros_like(a, dtype=complex)
        for (i, j) in idx[:count]:
            e[i, j] = -a[i, j]
            if hermitian and i != j:
                e[j, i] = -a[j, i]
        return e

    def induced(count: int) -> float:
        if count == 0:
            return 0.0
        return densela.spectral_norm(_hat(op, direction(count)))

    lo, hi = 0, len(idx)
    while lo < hi:  # largest count with induced norm within budget
        mid = (lo + hi + 1) // 2
        if induced(mid) <= budget:
            lo = mid
        else:
            hi = mid - 1
    count = lo
    while count > 1 and induced(count) > budget:
        count -= 1
    count = max(count, 1)  # budget below the smallest entry: shrink it partially
    return direction(count)


def perturb_rhs(b: np.ndarray, range_dual: DiscreteSpace, nu: float, seed: int
                ) -> np.ndarray:
    """Load vector perturbed by exactly nu times its dual norm.

    The raw direction is random; it is rescaled so that the dual norm of the
    change equals nu * ||b||_dual, hence |b(v) - b'(v)| <= nu ||b|| ||v|| for
    every test vector.
    """
    if not 0.0 <= nu < 1.0:
        raise ValueError(f"perturbation level must lie in [0, 1), got {nu}")
    b = np.asarray(b, dtype=complex)
    if nu == 0.0:
        return b
    l = densela.cholesky_hpd(range_dual.gram)
    b_dual = float(np.linalg.norm(np.linalg.solve(l, b)))
    if b_dual == 0.0:
        return b
    raw = Lcg64(seed).complex_vector(b.shape[0])
    if np.all(b.imag == 0.0):
        raw = raw.real.astype(complex)
    raw_dual = float(np.linalg.norm(np.linalg.solve(l, raw)))
    if raw_dual == 0.0:
        return b
    return b + (nu * b_dual / raw_dual) * raw
