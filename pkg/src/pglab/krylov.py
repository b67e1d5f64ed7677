"""Euclidean and weighted GMRES(m) plus preconditioned CG, with complete
residual-history capture.

Weighted GMRES runs the Arnoldi process directly in the weight inner product
(u, v)_H = v^H H u -- no square-root transformation of the system -- with
modified Gram-Schmidt and one re-orthogonalization pass whenever the basis
component left in the new vector exceeds the configured threshold.  Residual
norms come from the Givens recurrence; on happy breakdown the residual is
recomputed from scratch and the run is marked converged.  The initial guess is
always zero, so all histories are relative to the load vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config, densela
from .opprec import PreconditionedSystem, preconditioner_action
from .spaces import DiscreteSpace


class BreakdownError(Exception):
    """Arnoldi norm underflowed before convergence (not a happy breakdown)."""


class NotHpdError(Exception):
    """CG encountered non-positive curvature: the operator is not HPD."""


@dataclass(frozen=True)
class SolveConfig:
    """Solver selection: method in {gmres, weightedGmres, cg}, optional
    restart length, stopping tolerance (relative to the initial residual) and
    the weight for the inner product -- a Gram matrix, a DiscreteSpace, or
    None for the Euclidean case."""

    method: str = "gmres"
    restart: int | None = None
    tol: float = config.DEFAULT_SOLVE_TOL
    max_iter: int | None = None
    weight: object | None = None

    def __post_init__(self):
        if self.method not in ("gmres", "weightedGmres", "cg"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.restart is not None and self.restart < 1:
            raise ValueError("restart length must be >= 1")
        if self.tol <= 0.0:
            raise ValueError("tolerance must be positive")

    def weight_matrix(self, dim: int) -> np.ndarray | None:
        if self.weight is None:
            return None
        if isinstance(self.weight, DiscreteSpace):
            return self.weight.gram
        w = np.asarray(self.weight)
        if w.shape != (dim, dim):
            raise ValueError(f"weight shape {w.shape} does not match dim {dim}")
        return w


@dataclass
class ResidualHistory:
    """Per-iteration residual norms (index 0 is the initial residual) in the
    configured norm, derived k-th root convergence rates, and the iterates
    themselves for a-posteriori cross-checks."""

    norms: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    restart: int | None = None
    iterates: list = field(default_factory=list)

    @property
    def rates(self) -> np.ndarray:
        if len(self.norms) < 2 or self.norms[0] == 0.0:
            return np.zeros(0)
        rel = np.asarray(self.norms[1:]) / self.norms[0]
        k = np.arange(1, len(rel) + 1)
        return rel ** (1.0 / k)


@dataclass
class CgErrorHistory:
    """Per-iteration errors against the direct discrete solution, measured in
    the operator norm, with k-th root rates."""

    a_norm_errors: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    iterates: list = field(default_factory=list)

    @property
    def rates(self) -> np.ndarray:
        if len(self.a_norm_errors) < 2 or self.a_norm_errors[0] == 0.0:
            return np.zeros(0)
        rel = np.asarray(self.a_norm_errors[1:]) / self.a_norm_errors[0]
        k = np.arange(1, len(rel) + 1)
        return rel ** (1.0 / k)


def _givens(a: complex, b: complex) -> tuple[float, complex]:
    """Complex Givens pair (c real, s) zeroing b in (a, b)."""
    na, nb = abs(a), abs(b)
    denom = np.hypot(na, nb)
    if denom == 0.0:
        return 1.0, 0.0 + 0.0j
    if na == 0.0:
        return 0.0, 1.0 + 0.0j
    c = na / denom
    s = (a / na) * np.conjugate(b) / denom
    return float(c), complex(s)


def gmres_matrix(apply_q, d: np.ndarray, *, weight: np.ndarray | None = None,
                 restart: int | None = None, tol: float = config.DEFAULT_SOLVE_TOL,
                 max_iter: int | None = None) -> tuple[np.ndarray, ResidualHistory]:
    """GMRES(m) on Q x = d with x0 = 0 in the (optional) weight geometry.

    ``apply_q`` maps a vector to Q times it.  Residual norms are taken from
    the Givens recurrence; every iterate is materialized and stored.
    """
    d = np.asarray(d, dtype=complex)
    n = d.shape[0]
    m = restart if restart is not None else n
    m = min(m, n)
    cap = max_iter if max_iter is not None else n
    h_apply = (lambda v: v) if weight is None else (lambda v: weight @ v)

    def h_norm_of(v):
        return float(np.sqrt(max(np.vdot(v, h_apply(v)).real, 0.0)))

    hist = ResidualHistory(restart=restart)
    x = np.zeros(n, dtype=complex)
    beta0 = h_norm_of(d)
    hist.norms.append(beta0)
    if beta0 == 0.0:
        hist.converged = True
        return x, hist

    k_global = 0
    while k_global < cap and not hist.converged:
        r = d - apply_q(x) if k_global else d.copy()
        beta = h_norm_of(r)
        if beta <= tol * beta0:
            hist.converged = True
            break
        v_basis = np.zeros((n, m + 1), dtype=complex)
        v_basis[:, 0] = r / beta
        hmat = np.zeros((m + 1, m), dtype=complex)
        cos = np.zeros(m)
        sin = np.zeros(m, dtype=complex)
        g = np.zeros(m + 1, dtype=complex)
        g[0] = beta
        j = 0
        cycle_iterate = x
        while j < m and k_global < cap:
            w = apply_q(v_basis[:, j])
            scale = h_norm_of(w)
            hw = h_apply(w)
            # modified Gram-Schmidt in the weight inner product
            for i in range(j + 1):
                hij = complex(np.vdot(v_basis[:, i], hw))
                hmat[i, j] += hij
                w = w - hij * v_basis[:, i]
                hw = h_apply(w)
            # one re-orthogonalization pass when orthogonality degraded
            corr = v_basis[:, : j + 1].conj().T @ hw
            if np.linalg.norm(corr) > config.GMRES_REORTH_TOL * max(scale, 1e-300):
                for i in range(j + 1):
                    hmat[i, j] += corr[i]
                    w = w - corr[i] * v_basis[:, i]
                hw = h_apply(w)
            hnext = h_norm_of(w)
            happy = hnext <= config.GMRES_BREAKDOWN_RTOL * max(scale, 1e-300)
            hmat[j + 1, j] = hnext
            # rotate the new column and extend the rotation set
            for i in range(j):
                t1 = cos[i] * hmat[i, j] + sin[i] * hmat[i + 1, j]
                t2 = -np.conjugate(sin[i]) * hmat[i, j] + cos[i] * hmat[i + 1, j]
                hmat[i, j], hmat[i + 1, j] = t1, t2
            cos[j], sin[j] = _givens(hmat[j, j], hmat[j + 1, j])
            hmat[j, j] = cos[j] * hmat[j, j] + sin[j] * hmat[j + 1, j]
            hmat[j + 1, j] = 0.0
            g[j + 1] = -np.conjugate(sin[j]) * g[j]
            g[j] = cos[j] * g[j]

            y = np.linalg.solve(hmat[: j + 1, : j + 1], g[: j + 1])
            cycle_iterate = x + v_basis[:, : j + 1] @ y
            k_global += 1
            hist.iterates.append(cycle_iterate)
            if happy:
                # exact solution reached: report the recomputed residual
                true_norm = h_norm_of(d - apply_q(cycle_iterate))
                hist.norms.append(true_norm)
                hist.converged = True
                break
            rec_norm = abs(g[j + 1])
            hist.norms.append(float(rec_norm))
            if rec_norm <= tol * beta0:
                hist.converged = True
                break
            v_basis[:, j + 1] = w / hnext
            j += 1
        x = cycle_iterate
    hist.iterations = k_global
    return x, hist


def gmres_solve(sys: PreconditionedSystem, cfg: SolveConfig
                ) -> tuple[np.ndarray, ResidualHistory]:
    """GMRES on the left-preconditioned system: the operator applied is the
    solve/multiply chain of P A and the load is P b, so the recorded norms are
    the preconditioned residuals."""
    if cfg.method not in ("gmres", "weightedGmres"):
        raise ValueError(f"gmres_solve cannot run method {cfg.method!r}")
    p_apply = preconditioner_action(sys)
    a = sys.problem.op.matrix
    d = p_apply(sys.problem.rhs)
    weight = cfg.weight_matrix(sys.dim)
    if cfg.method == "weightedGmres" and weight is None:
        weight = sys.x_space.gram
    if cfg.method == "gmres":
        weight = None
    return gmres_matrix(
        lambda v: p_apply(a @ v), d,
        weight=weight, restart=cfg.restart, tol=cfg.tol, max_iter=cfg.max_iter,
    )


def cg_solve(sys: PreconditionedSystem, cfg: SolveConfig
             ) -> tuple[np.ndarray, CgErrorHistory]:
    """Preconditioned CG for the Hermitian positive definite configuration.

    Errors are measured against the direct discrete solution in the
    operator-induced norm.  Raises NotHpdError on a non-positive curvature.
    """
    a = sys.problem.op.matrix
    if not densela.is_hermitian(a):
        raise NotHpdError("system matrix is not Hermitian")
    p_apply = preconditioner_action(sys)
    b = sys.problem.rhs
    u_star = densela.solve_linear(a, b)

    def a_err(xv):
        e = xv - u_star
        return float(np.sqrt(max(np.vdot(e, a @ e).real, 0.0)))

    hist = CgErrorHistory()
    n = sys.dim
    cap = min(cfg.max_iter if cfg.max_iter is not None else n, n)
    x = np.zeros(n, dtype=complex)
    err0 = a_err(x)
    hist.a_norm_errors.append(err0)
    if np.linalg.norm(u_star) == 0.0:
        hist.converged = True
        return x, hist
    r = b.astype(complex).copy()
    z = p_apply(r)
    p = z.copy()
    rz = np.vdot(z, r).real
    for _ in range(cap):
        ap = a @ p
        curv = np.vdot(p, ap).real
        if curv <= 0.0:
            raise NotHpdError(f"non-positive curvature {curv:.3e}")
        alpha = rz / curv
        x = x + alpha * p
        r = r - alpha * ap
        hist.iterates.append(x)
        hist.a_norm_errors.append(a_err(x))
        hist.iterations += 1
        if hist.a_norm_errors[-1] <= cfg.tol * err0:
            hist.converged = True
            break
        z = p_apply(r)
        rz_new = np.vdot(z, r).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, hist


@dataclass(frozen=True)
class CrossCheckReport:
    """Per-iteration comparison of the Euclidean-minimal and weight-minimal
    residuals in both norms (all recomputed from stored iterates)."""

    euclid_of_euclid: np.ndarray
    euclid_of_weighted: np.ndarray
    weighted_of_euclid: np.ndarray
    weighted_of_weighted: np.ndarray
    ok: bool


def residual_cross_check(sys: PreconditionedSystem, hist_euclid: ResidualHistory,
                         hist_weighted: ResidualHistory, gram: np.ndarray
                         ) -> CrossCheckReport:
    """Verify that the Euclidean run has the smaller Euclidean residual and
    the weighted run the smaller weighted residual, per iteration.

    Both runs must target the same system from the zero initial guess.  Only
    iterations inside the first restart cycle are compared: past a restart the
    two runs minimize over different Krylov spaces and the inequalities carry
    no meaning.
    """
    if not hist_euclid.iterates or not hist_weighted.iterates:
        raise ValueError("histories carry no iterates to compare")
    if hist_euclid.iterates[0].shape != hist_weighted.iterates[0].shape:
        raise ValueError("histories come from systems of different dimension")
    p_apply = preconditioner_action(sys)
    a = sys.problem.op.matrix
    d = p_apply(sys.problem.rhs)
    limit = min(len(hist_euclid.iterates), len(hist_weighted.iterates))
    for h in (hist_euclid, hist_weighted):
        if h.restart is not None:
            limit = min(limit, h.restart)

    def norms(xk):
        res = d - p_apply(a @ xk)
        n2 = float(np.linalg.norm(res))
        nh = float(np.sqrt(max(np.vdot(res, gram @ res).real, 0.0)))
        return n2, nh

    e_of_e = np.empty(limit)
    e_of_w = np.empty(limit)
    w_of_e = np.empty(limit)
    w_of_w = np.empty(limit)
    for k in range(limit):
        e_of_e[k], w_of_e[k] = norms(hist_euclid.iterates[k])
        e_of_w[k], w_of_w[k] = norms(hist_weighted.iterates[k])
    slack2 = config.CROSS_NORM_RTOL * max(hist_euclid.norms[0], 1e-300)
    slack_h = config.CROSS_NORM_RTOL * max(hist_weighted.norms[0], 1e-300)
    ok = bool(np.all(e_of_e <= e_of_w + slack2) and np.all(w_of_w <= w_of_e + slack_h))
    return CrossCheckReport(e_of_e, e_of_w, w_of_e, w_of_w, ok)
