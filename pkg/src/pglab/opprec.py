"""Assembly and diagnostics of the preconditioned system.

The preconditioner action P = M^-1 C N^-1 is always applied as the chain
N v = A u, w = C v, M q = w (two solves, two products); P is formed
explicitly only inside diagnostics such as eigenvalue, singular-value and
field-of-values computations.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import densela, fov, config
from .perturb import PerturbationResult, PerturbationSpec, perturb_operator, perturb_rhs
from .problems import GalerkinOperator, PreconditionerSet, ProblemInstance, perturbed_problem


@dataclass(frozen=True)
class BaseConstants:
    """Stability constants of the unperturbed operators, frozen at assembly;
    bi-parametric bounds are built from these with analytic (1 +/- mu),
    (1 +/- nu) factors rather than re-measured perturbed constants."""

    gamma_a: float
    cont_a: float
    gamma_c: float
    cont_c: float
    gamma_m: float
    cont_m: float
    gamma_n: float
    cont_n: float

    @property
    def k_star(self) -> float:
        return (self.cont_m * self.cont_n * self.cont_c * self.cont_a) / (
            self.gamma_m * self.gamma_n * self.gamma_c * self.gamma_a
        )

    @property
    def k_a(self) -> float:
        return self.cont_a / self.gamma_a


@dataclass(frozen=True)
class ConditionConstants:
    k_a: float
    k_star: float
    k_star_mu_nu: float
    k_lambda: float
    kappa_s: float
    kappa_2: float


@dataclass(frozen=True)
class CoercivityConstants:
    v_h: float
    v_h_inv: float
    failed: bool


@dataclass(frozen=True)
class PreconditionedSystem:
    """A (possibly perturbed) problem/preconditioner pair with the perturbation
    levels and the unperturbed constants they were built from."""

    problem: ProblemInstance
    precond: PreconditionerSet
    mu: float
    nu: float
    base: BaseConstants
    base_problem: ProblemInstance
    base_precond: PreconditionerSet

    @property
    def dim(self) -> int:
        return self.problem.dim

    @property
    def x_space(self):
        return self.problem.op.domain


def biparam_factor(mu: float, nu: float) -> float:
    """Inflation factor (1+mu)(1+nu) / ((1-mu)(1-nu)) of the condition bound."""
    return ((1.0 + mu) * (1.0 + nu)) / ((1.0 - mu) * (1.0 - nu))


def assemble_system(problem: ProblemInstance, pset: PreconditionerSet,
                    mu: float = 0.0, nu: float = 0.0, *,
                    nu_rhs: float | None = None, mode: str = "denseRandom",
                    seed: int = 0) -> PreconditionedSystem:
    """Perturb the system form at level nu, the load at level nu_rhs
    (defaulting to nu) and the preconditioner form at level mu; the pairings
    M and N stay exact."""
    base = BaseConstants(
        gamma_a=problem.op.gamma, cont_a=problem.op.continuity,
        gamma_c=pset.c.gamma, cont_c=pset.c.continuity,
        gamma_m=pset.m.gamma, cont_m=pset.m.continuity,
        gamma_n=pset.n.gamma, cont_n=pset.n.continuity,
    )
    if nu_rhs is None:
        nu_rhs = nu
    if nu > 0.0:
        pa: PerturbationResult = perturb_operator(
            problem.op, PerturbationSpec(nu, mode, seed))
        op_nu = pa.op
    else:
        op_nu = problem.op
    rhs_nu = perturb_rhs(problem.rhs, problem.op.range_dual, nu_rhs, seed + 1)
    prob_nu = perturbed_problem(problem, op_nu, rhs_nu, pairing_n=pset.n.matrix)
    if mu > 0.0:
        pc = perturb_operator(pset.c, PerturbationSpec(mu, mode, seed + 2))
        pset_mu = replace(pset, c=pc.op,
                          bubnov=pset.bubnov and densela.is_hermitian(pc.op.matrix))
    else:
        pset_mu = pset
    return PreconditionedSystem(
        problem=prob_nu, precond=pset_mu, mu=mu, nu=nu,
        base=base, base_problem=problem, base_precond=pset,
    )


def preconditioner_action(sys: PreconditionedSystem):
    """Closure applying P = M^-1 C N^-1 with the two factorizations reused."""
    n_solver = densela.LuSolver(sys.precond.n.matrix)
    m_solver = densela.LuSolver(sys.precond.m.matrix)
    c = sys.precond.c.matrix

    def apply(vec: np.ndarray) -> np.ndarray:
        return m_solver.solve(c @ n_solver.solve(vec))

    return apply


def apply_preconditioned(sys: PreconditionedSystem, u: np.ndarray) -> np.ndarray:
    """q = M^-1 C N^-1 A u via the solve/multiply chain; P is never formed."""
    u = np.asarray(u)
    if u.shape[0] != sys.dim:
        raise ValueError(f"vector length {u.shape[0]} != system dim {sys.dim}")
    return preconditioner_action(sys)(sys.problem.op.matrix @ u)


def pa_matrix(sys: PreconditionedSystem) -> np.ndarray:
    """Explicit product P A for diagnostics (eigenvalues, FoV)."""
    return preconditioner_action(sys)(sys.problem.op.matrix)


def condition_constants(sys: PreconditionedSystem) -> ConditionConstants:
    """Measured spectral/Euclidean condition numbers of the explicit product
    together with the analytic bounds built from unperturbed constants."""
    pa = pa_matrix(sys)
    k_lambda = _k_lambda(sys)
    return ConditionConstants(
        k_a=sys.base.k_a,
        k_star=sys.base.k_star,
        k_star_mu_nu=sys.base.k_star * biparam_factor(sys.mu, sys.nu),
        k_lambda=k_lambda,
        kappa_s=densela.kappa_s(pa),
        kappa_2=densela.kappa_2(pa),
    )


def _k_lambda(sys: PreconditionedSystem) -> float:
    from .spaces import synthesis_constants

    return synthesis_constants(sys.x_space).kappa


def coercivity_constants(sys: PreconditionedSystem,
                         samples: int = config.FOV_BASE_SAMPLES) -> CoercivityConstants:
    """Distances of the weighted field of values of P A and of its inverse
    from the origin; the inverse is inverted explicitly (desk scale).  The
    failed flag is set when either set contains the origin."""
    pa = pa_matrix(sys)
    gram = sys.x_space.gram
    sample = fov.field_of_values(pa, gram, samples)
    sample_inv = fov.field_of_values(np.linalg.inv(pa), gram, samples)
    return CoercivityConstants(
        v_h=sample.v_h,
        v_h_inv=sample_inv.v_h,
        failed=sample.contains_zero or sample_inv.contains_zero,
    )
