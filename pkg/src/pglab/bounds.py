"""Experiment orchestration: verify each condition-number and convergence
inequality on assembled instances and produce structured reports.

Every report compares a measured quantity against a bound line computed from
constants obtained *before* the solve (never from solver output), carries the
instance context, and distinguishes "violated" from "not applicable" (a
precondition of the statement, such as coercivity, failed the measurement).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config, densela, fov
from .krylov import SolveConfig, cg_solve, gmres_solve, residual_cross_check
from .opprec import (PreconditionedSystem, assemble_system, biparam_factor,
                     coercivity_constants, condition_constants)
from .problems import circle_fourier, circle_symbols, fredholm_second_kind
from .spaces import dual_norm


class MissingCompactPartError(Exception):
    pass


class MissingExactSolutionError(Exception):
    pass


@dataclass(frozen=True)
class BoundReport:
    """One verified inequality: measured value(s), bound line, satisfied flag
    and worst-case margin; ``applicable`` is False when a precondition failed,
    in which case ``satisfied`` is None."""

    bound_id: str
    measured: np.ndarray
    bound: np.ndarray
    satisfied: bool | None
    margin: float
    context: dict
    applicable: bool = True
    note: str = ""
    verified: np.ndarray | None = None

    def tightest(self) -> tuple[float, float]:
        """(measured, bound) at the verified index of smallest margin."""
        mask = self.verified if self.verified is not None else np.ones(
            self.measured.shape, dtype=bool)
        if not np.any(mask):
            return 0.0, 0.0
        gap = np.where(mask, self.bound - self.measured, np.inf)
        i = int(np.argmin(gap))
        return float(self.measured[i]), float(self.bound[i])

    def to_dict(self) -> dict:
        measured, bound = (self.tightest() if len(self.measured) else (0.0, 0.0))
        return {
            "boundId": self.bound_id,
            "context": self.context,
            "measured": measured,
            "bound": bound,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "applicable": self.applicable,
            "note": self.note,
            "measuredPerK": list(map(float, self.measured)),
            "boundPerK": list(map(float, self.bound)),
        }


def _make_report(bound_id: str, measured, bound, tol, context, applicable=True,
                 note="", verify_mask=None) -> BoundReport:
    measured = np.atleast_1d(np.asarray(measured, dtype=float))
    bound = np.atleast_1d(np.asarray(bound, dtype=float))
    if bound.shape != measured.shape:
        bound = np.broadcast_to(bound, measured.shape).copy()
    if verify_mask is None:
        verify_mask = np.ones(measured.shape, dtype=bool)
    checked_m = measured[verify_mask]
    checked_b = bound[verify_mask]
    margin = float(np.min(checked_b - checked_m)) if len(checked_m) else 0.0
    satisfied: bool | None
    if not applicable:
        satisfied = None
    else:
        satisfied = bool(np.all(checked_m <= checked_b + tol))
    if not np.all(verify_mask):
        skipped = int(np.sum(~verify_mask))
        note = (note + "; " if note else "") + (
            f"{skipped} iteration(s) below the precision floor excluded")
    return BoundReport(bound_id, measured, bound, satisfied, margin, context,
                       applicable, note, verified=np.asarray(verify_mask))


def _rate_tol(bound: np.ndarray) -> np.ndarray:
    return config.RATE_BOUND_RTOL * np.maximum(1.0, np.atleast_1d(bound))


def _context(sys: PreconditionedSystem, **extra) -> dict:
    ctx = {"family": sys.problem.family, "N": sys.dim, "mu": sys.mu, "nu": sys.nu}
    ctx.update(extra)
    return ctx


# -- condition-number bounds ----------------------------------------------------


def check_condition_bounds(sys: PreconditionedSystem) -> list[BoundReport]:
    """Spectral and Euclidean condition numbers of the preconditioned product
    against the product bound of continuity over inf-sup constants, inflated
    by the analytic (1+mu)(1+nu)/((1-mu)(1-nu)) factor when perturbed."""
    cc = condition_constants(sys)
    ctx = _context(sys)
    tol = config.COND_BOUND_ATOL
    reports = []
    if sys.mu == 0.0 and sys.nu == 0.0:
        reports.append(_make_report("spectral-op", cc.kappa_s, cc.k_star, tol, ctx))
        reports.append(_make_report(
            "euclidean-op", cc.kappa_2, cc.k_star * cc.k_lambda**2, tol, ctx))
    reports.append(_make_report(
        "spectral-biparam", cc.kappa_s, cc.k_star_mu_nu, tol, ctx))
    reports.append(_make_report(
        "euclidean-biparam", cc.kappa_2, cc.k_star_mu_nu * cc.k_lambda**2, tol, ctx))
    return reports


# -- GMRES linear bounds ---------------------------------------------------------


def check_gmres_linear(sys: PreconditionedSystem, cfg: SolveConfig | None = None,
                       fov_samples: int = config.FOV_BASE_SAMPLES
                       ) -> list[BoundReport]:
    """Linear GMRES(m) rate bounds.

    Three lines are reported: the sharp field-of-values one-step bound
    (1 - V_H V_H^inv)^(k/2) on relative weighted residuals, and the two
    condition-style rate bounds sqrt(1 - 1/K*) for the weighted and
    K_Lambda-inflated Euclidean rates.  The condition-style bounds are only
    applicable when the measured coercivity constants actually dominate
    1/K*, which is verified, not assumed; a failed coercivity measurement
    yields "not applicable", never a violation.
    """
    if cfg is None:
        cfg = SolveConfig(method="weightedGmres", restart=10)
    coer = coercivity_constants(sys, fov_samples)
    cc = condition_constants(sys)
    ctx = _context(sys, restart=cfg.restart, method="gmres-linear")

    cfg_w = SolveConfig(method="weightedGmres", restart=cfg.restart, tol=cfg.tol,
                        max_iter=cfg.max_iter, weight=cfg.weight)
    cfg_e = SolveConfig(method="gmres", restart=cfg.restart, tol=cfg.tol,
                        max_iter=cfg.max_iter)
    _, hist_w = gmres_solve(sys, cfg_w)
    _, hist_e = gmres_solve(sys, cfg_e)

    reports = []
    k = np.arange(1, len(hist_w.norms))
    rel_w = np.asarray(hist_w.norms[1:]) / hist_w.norms[0]
    prod = coer.v_h * coer.v_h_inv
    fov_bound = (1.0 - min(prod, 1.0)) ** (k / 2.0)
    reports.append(_make_report(
        "gmres-fov-linear", rel_w, fov_bound, _rate_tol(fov_bound), ctx,
        applicable=not coer.failed,
        note="" if not coer.failed else "field of values touches the origin",
    ))

    assumption_ok = (not coer.failed) and prod * cc.k_star_mu_nu >= 1.0 - 1e-12
    note = "" if assumption_ok else (
        "coercivity constants do not dominate the condition bound")
    rate_bound = np.sqrt(1.0 - 1.0 / cc.k_star_mu_nu)
    reports.append(_make_report(
        "gmres-linear-weighted", hist_w.rates, rate_bound,
        _rate_tol(np.asarray([rate_bound])), ctx, applicable=assumption_ok, note=note))
    eucl_bound = cc.k_lambda * rate_bound
    reports.append(_make_report(
        "gmres-linear-euclidean", hist_e.rates, eucl_bound,
        _rate_tol(np.asarray([eucl_bound])), ctx, applicable=assumption_ok, note=note))
    reports.append(_cross_norm_report(sys, hist_e, hist_w, ctx))
    return reports


def _cross_norm_report(sys, hist_e, hist_w, ctx) -> BoundReport:
    check = residual_cross_check(sys, hist_e, hist_w, sys.x_space.gram)
    viol_2 = np.max(check.euclid_of_euclid - check.euclid_of_weighted, initial=0.0)
    viol_h = np.max(check.weighted_of_weighted - check.weighted_of_euclid, initial=0.0)
    slack = config.CROSS_NORM_RTOL * max(hist_e.norms[0], hist_w.norms[0], 1e-300)
    return _make_report(
        "gmres-cross-norms", [viol_2, viol_h], [0.0, 0.0], slack, ctx,
        note="max violation of the minimal-residual cross-norm inequalities")


# -- GMRES super-linear bounds ---------------------------------------------------


def compact_chain_matrix(sys: PreconditionedSystem) -> np.ndarray:
    """The compact part of the preconditioned endomorphism in Galerkin form:
    C_mu N^-1 A_nu - M, so that M^-1 (that) = P_mu A_nu - I."""
    t = densela.solve_linear(sys.precond.n.matrix, sys.problem.op.matrix)
    return sys.precond.c.matrix @ t - sys.precond.m.matrix


def check_gmres_superlinear(sys: PreconditionedSystem, *, max_iter: int | None = None,
                            ) -> list[BoundReport]:
    """Super-linear GMRES rate bounds for second-kind structure.

    The k-th root of the relative residual is compared against the partial
    arithmetic mean of the weighted singular values of the preconditioned
    compact part, scaled by ||n|| / (gamma_C gamma_A (1-mu)(1-nu)); for a
    positive class index p the k^(-1/p) tail line is checked as well.
    """
    problem = sys.problem
    if problem.compact_part is None:
        raise MissingCompactPartError(
            f"family {problem.family!r} carries no compact part")
    p = problem.carleman_index or 0.0
    kmn = compact_chain_matrix(sys)
    diag = fov.carleman_diagnostics(kmn, sys.precond.m.matrix, sys.x_space.gram, p)
    base = sys.base
    factor = base.cont_n / (base.gamma_c * base.gamma_a
                            * (1.0 - sys.mu) * (1.0 - sys.nu))
    ctx = _context(sys, method="gmres-superlinear", p=p)

    cfg_w = SolveConfig(method="weightedGmres", restart=None, tol=1e-32,
                        max_iter=max_iter)
    cfg_e = SolveConfig(method="gmres", restart=None, tol=1e-32, max_iter=max_iter)
    _, hist_w = gmres_solve(sys, cfg_w)
    _, hist_e = gmres_solve(sys, cfg_e)

    def _floor_mask(hist):
        rel = np.asarray(hist.norms[1:]) / hist.norms[0]
        return rel >= config.RATE_VERIFY_FLOOR

    reports = []
    kw = len(hist_w.rates)
    mask_w = _floor_mask(hist_w)
    bound_w = factor * diag.partial_means[:kw]
    reports.append(_make_report(
        "gmres-superlinear-weighted", hist_w.rates, bound_w, _rate_tol(bound_w),
        ctx, verify_mask=mask_w))
    cc = condition_constants(sys)
    ke = len(hist_e.rates)
    bound_e = cc.k_lambda * factor * diag.partial_means[:ke]
    reports.append(_make_report(
        "gmres-superlinear-euclidean", hist_e.rates, bound_e, _rate_tol(bound_e),
        ctx, verify_mask=_floor_mask(hist_e)))
    if p > 0.0:
        k = np.arange(1, kw + 1, dtype=float)
        tail = factor * diag.carleman_norm * k ** (-1.0 / p)
        reports.append(_make_report(
            "gmres-superlinear-ptail", hist_w.rates, tail, _rate_tol(tail), ctx,
            verify_mask=mask_w))
        k_all = np.arange(1, len(diag.partial_means) + 1, dtype=float)
        tail_all = diag.carleman_norm * k_all ** (-1.0 / p)
        reports.append(_make_report(
            "carleman-tail", diag.partial_means, tail_all, config.COND_BOUND_ATOL,
            ctx, note="partial singular-value means against the p-class tail"))
    reports.append(_cross_norm_report(sys, hist_e, hist_w, ctx))
    return reports


# -- CG (elliptic case) ----------------------------------------------------------


def check_cg_elliptic(sys: PreconditionedSystem, cfg: SolveConfig | None = None
                      ) -> list[BoundReport]:
    """CG error-rate bound 2^(1/k) (1 - 2/(sqrt(K*) + 1)) in the operator
    norm, for the Hermitian positive definite (equal-space) configuration;
    the eigenvalue-mean super-linear line is added when the instance carries a
    compact part."""
    if cfg is None:
        cfg = SolveConfig(method="cg")
    cc = condition_constants(sys)
    ctx = _context(sys, method="cg")
    _, hist = cg_solve(sys, cfg)
    k = np.arange(1, len(hist.rates) + 1, dtype=float)
    bound = 2.0 ** (1.0 / k) * (1.0 - 2.0 / (np.sqrt(cc.k_star_mu_nu) + 1.0))
    reports = [_make_report("cg-linear", hist.rates, bound, _rate_tol(bound), ctx)]
    if sys.problem.compact_part is not None:
        kmn = compact_chain_matrix(sys)
        prec = densela.solve_linear(sys.precond.m.matrix, kmn)
        mods = np.abs(densela.general_eigen(prec).eigenvalues)
        means = np.cumsum(mods) / np.arange(1, len(mods) + 1)
        base = sys.base
        factor = 2.0 * base.cont_n / (base.gamma_c * base.gamma_a
                                      * (1.0 - sys.mu) * (1.0 - sys.nu))
        bound_sup = factor * means[: len(hist.rates)]
        reports.append(_make_report(
            "cg-superlinear-eigmean", hist.rates, bound_sup, _rate_tol(bound_sup), ctx))
    return reports


# -- quasi-optimality / perturbation error study ----------------------------------


@dataclass(frozen=True)
class StrangLevel:
    modes: int
    dim: int
    nu: float
    error_x: float
    best_approx: float
    bound_inf_form: float
    bound_product_form: float
    cea_bound: float


@dataclass(frozen=True)
class StrangStudy:
    rows: list
    satisfied: bool


def strang_study(levels, nu_rule, *, family: str = "circle", radius: float = 0.5,
                 c0: float = 0.5, mode: str = "denseRandom", seed: int = 0
                 ) -> StrangStudy:
    """Error of the perturbed discrete solution against the analytic solution
    across a refinement sequence, with both quasi-optimality bound lines.

    The reference solution is the analytic coefficient sequence truncated at
    8x the finest level, so no reference solve enters the error budget.  Only
    the circle family carries an analytic solution.
    """
    if family != "circle":
        raise MissingExactSolutionError(f"family {family!r} has no exact solution")
    levels = sorted(int(k) for k in levels)
    k_ref = 8 * levels[-1]
    kk, s_ref, w_ref, _ = circle_symbols(k_ref, radius, c0)
    b_ref = (1.0 + kk**2) ** -2.0
    u_ref = b_ref / w_ref

    rows = []
    ok = True
    for modes in levels:
        problem, pset = circle_fourier(modes, radius, c0)
        h = 1.0 / modes
        nu = float(nu_rule(h))
        if not 0.0 <= nu < 1.0:
            raise ValueError(f"nu rule produced {nu} outside [0, 1)")
        sys = assemble_system(problem, pset, mu=0.0, nu=nu, mode=mode,
                              seed=seed + modes)
        u_h = densela.solve_linear(sys.problem.op.matrix, sys.problem.rhs)
        offset = k_ref - modes
        padded = np.zeros_like(u_ref, dtype=complex)
        padded[offset:offset + 2 * modes + 1] = u_h
        diff = u_ref - padded
        error_x = float(np.sqrt(np.sum(s_ref * np.abs(diff) ** 2)))
        inside = np.abs(kk) <= modes
        best = float(np.sqrt(np.sum(s_ref[~inside] * np.abs(u_ref[~inside]) ** 2)))
        wh_norm = float(np.sqrt(np.sum(s_ref[inside] * np.abs(u_ref[inside]) ** 2)))
        k_a = problem.op.bnb_condition
        gamma_a = problem.op.gamma
        b_dual = dual_norm(problem.op.range_dual, problem.rhs)
        line_inf = ((1.0 + k_a / (1.0 - nu)) * best
                    + nu / (1.0 - nu) * wh_norm
                    + nu * b_dual / (gamma_a * (1.0 - nu)))
        line_prod = ((1.0 + k_a) * (1.0 + k_a / (1.0 - nu)) * best
                     + 2.0 * nu * b_dual / (gamma_a * (1.0 - nu)))
        cea = (1.0 + k_a) * best
        slack = 1e-12 * max(1.0, line_inf)
        level_ok = error_x <= min(line_inf, line_prod) + slack
        ok = ok and level_ok
        rows.append(StrangLevel(modes, 2 * modes + 1, nu, error_x, best,
                                line_inf, line_prod, cea))
    return StrangStudy(rows, ok)


def fit_order(study: StrangStudy) -> float:
    """Convergence order: slope of log(error) against log(h)."""
    h = np.array([1.0 / row.modes for row in study.rows])
    err = np.array([max(row.error_x, 1e-300) for row in study.rows])
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def make_nu_rule(name: str, levels=None, radius: float = 0.5, c0: float = 0.5):
    """Named level rules: 'zero', 'fixed:<v>', 'pow:<r>', or 'hrate' (power
    rule at the family's measured unperturbed order)."""
    if name == "zero":
        return lambda h: 0.0
    if name.startswith("fixed:"):
        val = float(name.split(":", 1)[1])
        return lambda h: val
    if name.startswith("pow:"):
        r = float(name.split(":", 1)[1])
        return lambda h: min(0.9, h**r)
    if name == "hrate":
        if levels is None:
            raise ValueError("'hrate' needs the refinement levels")
        base = strang_study(levels, lambda h: 0.0, radius=radius, c0=c0)
        r = fit_order(base)
        return lambda h: min(0.9, h**r)
    raise ValueError(f"unknown nu rule {name!r}")


# -- parameter sweeps ------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    reports: list
    rows: list
    violations: int


def _sweep_point(family, n_param, mu, nu, mode, seed, fov_samples, solver_restart):
    if family == "circle":
        problem, pset = circle_fourier(n_param)
    elif family == "fredholm":
        problem, pset = fredholm_second_kind(n_param, 0.5)
    else:
        raise ValueError(f"sweep does not support family {family!r}")
    sys = assemble_system(problem, pset, mu=mu, nu=nu, mode=mode, seed=seed)
    reports = check_condition_bounds(sys)
    if family == "circle":
        reports += check_gmres_linear(
            sys, SolveConfig(method="weightedGmres", restart=solver_restart),
            fov_samples=fov_samples)
    else:
        reports += check_gmres_superlinear(sys, max_iter=solver_restart)
    return reports


def sweep(family: str, n_values, mus, nus, *, mode: str = "denseRandom",
          seed: int = 0, jobs: int = 1, fov_samples: int = config.FOV_SWEEP_SAMPLES,
          solver_restart: int = 10) -> SweepResult:
    """Run condition and solver checks on the full (N, mu, nu) grid, plus an
    h-independence summary across N on the unperturbed instances."""
    points = [(n, mu, nu) for n in n_values for mu in mus for nu in nus]
    seeds = {pt: seed + i for i, pt in enumerate(points)}

    def run(pt):
        n, mu, nu = pt
        return _sweep_point(family, n, mu, nu, mode, seeds[pt], fov_samples,
                            solver_restart)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, points))
    else:
        results = [run(pt) for pt in points]

    reports: list[BoundReport] = []
    rows = []
    for pt, point_reports in zip(points, results):
        n, mu, nu = pt
        for rep in point_reports:
            reports.append(rep)
            measured, bound = rep.tightest()
            rows.append((family, n, mu, nu, rep.bound_id, measured, bound,
                         rep.satisfied, rep.margin))

    if family == "circle" and len(n_values) > 1:
        kappas = []
        for n in n_values:
            problem, pset = circle_fourier(n)
            sys0 = assemble_system(problem, pset)
            kappas.append(condition_constants(sys0).kappa_s)
        ratio = max(kappas) / min(kappas)
        rep = _make_report(
            "h-independence", ratio, 1.05, 0.0,
            {"family": family, "N": list(map(int, n_values)), "mu": 0.0, "nu": 0.0},
            note="spread of the preconditioned spectral condition number across N")
        reports.append(rep)
        rows.append((family, 0, 0.0, 0.0, rep.bound_id, ratio, 1.05,
                     rep.satisfied, rep.margin))

    violations = sum(1 for r in reports if r.satisfied is False)
    return SweepResult(reports, rows, violations)
