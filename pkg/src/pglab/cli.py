"""Command-line front end.

Subcommands compose the generators, perturbations, solvers, diagnostics and
bound verification into reproducible experiments.  Every run writes
deterministic artifacts (Matrix Market, JSON with 17-significant-digit
floats, CSV) for a given configuration and seed.

Exit codes: 0 success, 1 a verified bound was violated, 2 usage error,
3 numerical failure (the originating module message is printed verbatim).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import bounds as bounds_mod
from . import config, densela, fov, matio, report
from .bounds import (check_cg_elliptic, check_condition_bounds, check_gmres_linear,
                     check_gmres_superlinear, compact_chain_matrix, make_nu_rule,
                     strang_study, sweep)
from .krylov import SolveConfig, cg_solve, gmres_solve
from .opprec import assemble_system, condition_constants
from .problems import (circle_fourier, dump_problem, fredholm_second_kind,
                       graded_mass, random_demo)
from .spaces import synthesis_constants


def _unit_interval(text: str) -> float:
    val = float(text)
    if not 0.0 <= val < 1.0:
        raise argparse.ArgumentTypeError(f"{text}: must lie in [0,1)")
    return val


def _positive_int(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"{text}: must be >= 1")
    return val


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _family_args(p, families=("circle", "fredholm")) -> None:
    p.add_argument("--family", choices=families, default="circle")
    p.add_argument("--modes", type=_positive_int, default=32,
                   help="number of Fourier modes K (circle; N = 2K+1)")
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--c0", type=float, default=0.5,
                   help="stabilization replacing the zero-mode symbol (circle)")
    p.add_argument("--n", type=_positive_int, default=64,
                   help="number of elements (fredholm/graded/random)")
    p.add_argument("--width", type=float, default=0.5,
                   help="kernel width (fredholm)")


def _perturb_args(p) -> None:
    p.add_argument("--mu", type=_unit_interval, default=0.0,
                   help="preconditioner perturbation level in [0,1)")
    p.add_argument("--nu", type=_unit_interval, default=0.0,
                   help="system perturbation level in [0,1)")
    p.add_argument("--nu-rhs", type=_unit_interval, default=None,
                   help="load perturbation level (defaults to --nu)")
    p.add_argument("--mode", choices=("denseRandom", "svdTruncation", "entryDrop"),
                   default="denseRandom")
    p.add_argument("--seed", type=int, default=0)


def _make_instance(args):
    if args.family == "circle":
        problem, pset = circle_fourier(args.modes, args.radius, args.c0)
        params = {"modes": args.modes, "radius": args.radius, "c0": args.c0}
    else:
        problem, pset = fredholm_second_kind(args.n, args.width)
        params = {"n": args.n, "width": args.width}
    return problem, pset, params


def _make_system(args):
    problem, pset, params = _make_instance(args)
    sys_ = assemble_system(problem, pset, mu=args.mu, nu=args.nu,
                           nu_rhs=args.nu_rhs, mode=args.mode, seed=args.seed)
    return sys_, params


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write_reports(path, reports, context) -> int:
    payload = {"context": context, "reports": [r.to_dict() for r in reports]}
    report.write_json(path, payload)
    violations = sum(1 for r in reports if r.satisfied is False)
    for r in reports:
        state = {True: "ok", False: "VIOLATED", None: "n/a"}[r.satisfied]
        print(f"{r.bound_id}: {state} (margin {r.margin:.3e})")
    return 1 if violations else 0


def _cmd_assemble(args) -> int:
    out = _outdir(args)
    if args.family == "graded":
        l2, h1 = graded_mass(args.n, args.grading)
        matio.write_matrix(os.path.join(out, "gram_l2.mtx"), l2.gram)
        matio.write_matrix(os.path.join(out, "gram_h1.mtx"), h1.gram)
        c2, c1 = synthesis_constants(l2), synthesis_constants(h1)
        report.write_json(os.path.join(out, "problem.json"), {
            "family": "graded",
            "params": {"n": args.n, "grading": args.grading},
            "h_min": l2.mesh.h_min, "h_max": l2.mesh.h_max,
            "k_lambda_l2": c2.kappa, "k_lambda_h1": c1.kappa,
        })
        return 0
    if args.family == "random":
        q = random_demo(args.n, args.scale, args.seed)
        matio.write_matrix(os.path.join(out, "Q.mtx"), q)
        report.write_json(os.path.join(out, "problem.json"), {
            "family": "random",
            "params": {"n": args.n, "scale": args.scale, "seed": args.seed},
            "kappa_s": densela.kappa_s(q), "kappa_2": densela.kappa_2(q),
        })
        return 0
    problem, pset, params = _make_instance(args)
    dump_problem(problem, pset, out, params)
    print(f"wrote {problem.family} instance (N={problem.dim}) to {out}")
    return 0


def _cmd_perturb(args) -> int:
    out = _outdir(args)
    sys_, params = _make_system(args)
    from .perturb import measure_perturbation
    matio.write_matrix(os.path.join(out, "A_nu.mtx"), sys_.problem.op.matrix)
    matio.write_matrix(os.path.join(out, "C_mu.mtx"), sys_.precond.c.matrix)
    matio.write_vector(os.path.join(out, "rhs_nu.csv"), sys_.problem.rhs)
    nu_op = measure_perturbation(sys_.base_problem.op, sys_.problem.op).nu_actual
    mu_op = measure_perturbation(sys_.base_precond.c, sys_.precond.c).nu_actual
    report.write_json(os.path.join(out, "perturbation.json"), {
        "family": sys_.problem.family, "params": params,
        "mode": args.mode, "seed": args.seed,
        "nu_requested": args.nu, "nu_actual": nu_op,
        "mu_requested": args.mu, "mu_actual": mu_op,
        "gamma_a": sys_.base_problem.op.gamma,
        "gamma_a_nu": sys_.problem.op.gamma,
    })
    print(f"nu_actual={nu_op:.6g} mu_actual={mu_op:.6g}")
    return 0


def _resolve_weight(args, sys_):
    if args.weight == "euclid":
        return None
    if args.weight == "pinv":
        return sys_.precond.p_inverse_gram()
    return sys_.x_space.gram


def _cmd_solve(args) -> int:
    out = _outdir(args)
    sys_, params = _make_system(args)
    cc = condition_constants(sys_)
    if args.method == "cg":
        cfg = SolveConfig(method="cg", tol=args.tol, max_iter=args.max_iter)
        x, hist = cg_solve(sys_, cfg)
        rho = 1.0 - 2.0 / (np.sqrt(cc.k_star_mu_nu) + 1.0)
        k = np.arange(1, len(hist.a_norm_errors))
        bound = 2.0 * hist.a_norm_errors[0] * rho**k
        rows = [(0, hist.a_norm_errors[0], "", "")]
        rows += [(int(i), hist.a_norm_errors[i], hist.rates[i - 1], bound[i - 1])
                 for i in k]
        header = ["k", "a_norm_error", "rate", "bound"]
        norms0 = hist.a_norm_errors[0]
    else:
        weight = _resolve_weight(args, sys_)
        cfg = SolveConfig(method=args.method, restart=args.restart, tol=args.tol,
                          max_iter=args.max_iter, weight=weight)
        x, hist = gmres_solve(sys_, cfg)
        rho = np.sqrt(max(1.0 - 1.0 / cc.k_star_mu_nu, 0.0))
        if args.method == "gmres":
            rho_line = cc.k_lambda * rho
        else:
            rho_line = rho
        k = np.arange(1, len(hist.norms))
        bound = hist.norms[0] * rho_line**k
        rows = [(0, hist.norms[0], "", "")]
        rows += [(int(i), hist.norms[i], hist.rates[i - 1], bound[i - 1]) for i in k]
        header = ["k", "residual_norm", "rate", "bound"]
        norms0 = hist.norms[0]
    report.write_csv(os.path.join(out, "history.csv"), header, rows)
    matio.write_vector(os.path.join(out, "solution.csv"), x)
    report.write_json(os.path.join(out, "solve.json"), {
        "family": sys_.problem.family, "params": params,
        "method": args.method, "restart": args.restart,
        "mu": sys_.mu, "nu": sys_.nu, "seed": args.seed,
        "converged": hist.converged, "iterations": hist.iterations,
        "initial_norm": norms0,
        "k_star": cc.k_star, "k_star_mu_nu": cc.k_star_mu_nu,
        "k_lambda": cc.k_lambda,
    })
    print(f"{args.method}: converged={hist.converged} iterations={hist.iterations}")
    return 0


def _cmd_fov(args) -> int:
    out = _outdir(args)
    if args.family == "random":
        q = random_demo(args.n, args.scale, args.seed)
        gram = None
        label = "random"
    else:
        sys_, _ = _make_system(args)
        from .opprec import pa_matrix
        q = pa_matrix(sys_)
        gram = sys_.x_space.gram
        label = sys_.problem.family
    sample = fov.field_of_values(q, gram, args.samples)
    rows = zip(sample.angles, sample.support_values,
               sample.boundary_points.real, sample.boundary_points.imag)
    report.write_csv(os.path.join(out, "fov.csv"),
                     ["theta", "support", "re", "im"], rows)
    payload = {"family": label, "v_h": sample.v_h,
               "contains_zero": sample.contains_zero}
    if args.inverse:
        inv = fov.field_of_values(np.linalg.inv(q), gram, args.samples)
        rows = zip(inv.angles, inv.support_values,
                   inv.boundary_points.real, inv.boundary_points.imag)
        report.write_csv(os.path.join(out, "fov_inverse.csv"),
                         ["theta", "support", "re", "im"], rows)
        payload["v_h_inverse"] = inv.v_h
        payload["contains_zero_inverse"] = inv.contains_zero
    report.write_json(os.path.join(out, "fov.json"), payload)
    print(f"v_h={sample.v_h:.6g} contains_zero={sample.contains_zero}")
    return 0


def _cmd_carleman(args) -> int:
    out = _outdir(args)
    args.family = "fredholm"
    sys_, params = _make_system(args)
    if sys_.problem.compact_part is None:
        print("error: instance has no compact part", file=sys.stderr)
        return 3
    kmn = compact_chain_matrix(sys_)
    diag = fov.carleman_diagnostics(kmn, sys_.precond.m.matrix,
                                    sys_.x_space.gram, args.p)
    j = np.arange(1, len(diag.singular_values) + 1)
    tail = diag.carleman_norm * j ** (-1.0 / args.p) if args.p > 0 else np.full(len(j), np.nan)
    report.write_csv(os.path.join(out, "carleman.csv"),
                     ["j", "sigma", "partial_mean", "tail_bound"],
                     zip(j, diag.singular_values, diag.partial_means, tail))
    report.write_json(os.path.join(out, "carleman.json"), {
        "family": "fredholm", "params": params, "p": args.p,
        "carleman_norm": diag.carleman_norm,
        "sigma_1": float(diag.singular_values[0]),
        "mu": args.mu, "nu": args.nu,
    })
    print(f"p={args.p} class norm={diag.carleman_norm:.6g}")
    return 0


def _cmd_verify(args) -> int:
    out = _outdir(args)
    sys_, params = _make_system(args)
    reports = check_condition_bounds(sys_)
    if sys_.problem.family == "circle":
        reports += check_gmres_linear(
            sys_, SolveConfig(method="weightedGmres", restart=args.restart),
            fov_samples=args.samples)
        reports += check_cg_elliptic(sys_)
    else:
        reports += check_gmres_superlinear(sys_, max_iter=args.max_iter)
    context = {"family": sys_.problem.family, "params": params,
               "mu": args.mu, "nu": args.nu, "mode": args.mode, "seed": args.seed}
    return _write_reports(os.path.join(out, "report.json"), reports, context)


def _cmd_sweep(args) -> int:
    out = _outdir(args)
    grid = np.round(np.arange(args.grid) * (0.9 / max(args.grid - 1, 1)), 10)
    n_values = args.modes if args.family == "circle" else [args.n]
    result = sweep(args.family, n_values, grid.tolist(), grid.tolist(),
                   mode=args.mode, seed=args.seed, jobs=args.jobs,
                   solver_restart=args.restart)
    report.write_csv(os.path.join(out, "sweep.csv"),
                     ["family", "N", "mu", "nu", "boundId", "measured", "bound",
                      "satisfied", "margin"], result.rows)
    payload = {"context": {"family": args.family, "grid": grid.tolist(),
                           "n_values": list(map(int, n_values)), "seed": args.seed},
               "violations": result.violations,
               "reports": [r.to_dict() for r in result.reports]}
    report.write_json(os.path.join(out, "report.json"), payload)
    print(f"{len(result.reports)} reports, {result.violations} violations")
    return 1 if result.violations else 0


def _cmd_strang(args) -> int:
    out = _outdir(args)
    rule = make_nu_rule(args.nu_rule, args.levels, args.radius, args.c0)
    study = strang_study(args.levels, rule, radius=args.radius, c0=args.c0,
                         mode=args.mode, seed=args.seed)
    report.write_csv(os.path.join(out, "strang.csv"),
                     ["modes", "N", "nu", "error_x", "best_approx",
                      "bound_inf_form", "bound_product_form", "cea_bound"],
                     [(r.modes, r.dim, r.nu, r.error_x, r.best_approx,
                       r.bound_inf_form, r.bound_product_form, r.cea_bound)
                      for r in study.rows])
    report.write_json(os.path.join(out, "strang.json"), {
        "nu_rule": args.nu_rule, "satisfied": study.satisfied,
        "order": bounds_mod.fit_order(study),
        "levels": [r.modes for r in study.rows],
        "errors": [r.error_x for r in study.rows],
    })
    print(f"satisfied={study.satisfied} order={bounds_mod.fit_order(study):.3f}")
    return 0 if study.satisfied else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pglab",
        description="Operator-preconditioning laboratory: generate model "
                    "problems, perturb them, solve with Krylov methods and "
                    "verify condition-number and convergence-rate bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="generate a model instance and dump it "
                       "as Matrix Market files with a JSON sidecar")
    _family_args(p, ("circle", "fredholm", "graded", "random"))
    p.add_argument("--grading", type=float, default=1.0)
    p.add_argument("--scale", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_assemble)

    p = sub.add_parser("perturb", help="apply a controlled operator/load "
                       "perturbation and record the achieved levels against "
                       "the inf-sup stability estimates")
    _family_args(p)
    _perturb_args(p)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_perturb)

    p = sub.add_parser("solve", help="run GMRES(m), weighted GMRES(m) or CG on "
                       "the preconditioned system and export the residual "
                       "history with its rate-bound line")
    _family_args(p)
    _perturb_args(p)
    p.add_argument("--method", choices=("gmres", "weightedGmres", "cg"),
                   default="weightedGmres")
    p.add_argument("--restart", type=_positive_int, default=None)
    p.add_argument("--weight", choices=("x-gram", "pinv", "euclid"),
                   default="x-gram")
    p.add_argument("--tol", type=float, default=config.DEFAULT_SOLVE_TOL)
    p.add_argument("--max-iter", type=_positive_int, default=None)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("fov", help="sample the field of values (weighted "
                       "numerical range) whose origin distance drives the "
                       "linear GMRES bound")
    _family_args(p, ("circle", "fredholm", "random"))
    _perturb_args(p)
    p.add_argument("--scale", type=float, default=0.5)
    p.add_argument("--samples", type=_positive_int, default=config.FOV_BASE_SAMPLES)
    p.add_argument("--inverse", action="store_true",
                   help="also sample the field of values of the inverse")
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_fov)

    p = sub.add_parser("carleman", help="singular-value diagnostics of the "
                       "compact part: partial means and the p-class tail that "
                       "bound super-linear GMRES rates")
    _family_args(p, ("fredholm",))
    _perturb_args(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_carleman)

    p = sub.add_parser("verify", help="verify every applicable condition-number "
                       "and convergence bound on one instance; exit 1 on any "
                       "violation")
    _family_args(p)
    _perturb_args(p)
    p.add_argument("--restart", type=_positive_int, default=10)
    p.add_argument("--max-iter", type=_positive_int, default=None)
    p.add_argument("--samples", type=_positive_int, default=config.FOV_BASE_SAMPLES)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("sweep", help="bi-parametric grid of perturbation levels "
                       "with condition and solver checks at every point plus an "
                       "h-independence summary")
    p.add_argument("--family", choices=("circle", "fredholm"), default="circle")
    p.add_argument("--modes", type=_int_list, default=[32],
                   help="comma-separated mode counts (circle)")
    p.add_argument("--n", type=_positive_int, default=64)
    p.add_argument("--width", type=float, default=0.5)
    p.add_argument("--grid", type=_positive_int, default=10,
                   help="grid points per axis on [0, 0.9]")
    p.add_argument("--mode", choices=("denseRandom", "svdTruncation", "entryDrop"),
                   default="denseRandom")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--restart", type=_positive_int, default=10)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("strang", help="refinement study of the discretization "
                       "error under perturbation against the quasi-optimality "
                       "bound lines")
    p.add_argument("--levels", type=_int_list, default=[8, 16, 32, 64, 128])
    p.add_argument("--nu-rule", default="zero",
                   help="zero | fixed:<v> | pow:<r> | hrate")
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--c0", type=float, default=0.5)
    p.add_argument("--mode", choices=("denseRandom", "svdTruncation", "entryDrop"),
                   default="denseRandom")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="out")
    p.set_defaults(func=_cmd_strang)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (densela.LinearAlgebraError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
