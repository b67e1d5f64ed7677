"""pglab: a numerical laboratory for operator preconditioning of
Petrov-Galerkin systems under controlled perturbations of the forms and of
the preconditioner, with verified condition-number and Krylov-convergence
bounds."""

from .densela import (EigenResult, SvdResult, cholesky_hpd, general_eigen,
                      hermitian_eigen, kappa_2, kappa_s, solve_linear, svd)
from .spaces import DiscreteSpace, MeshMeta, SynthesisConstants, synthesis_constants
from .problems import (GalerkinOperator, PreconditionerSet, ProblemInstance,
                       circle_fourier, fredholm_second_kind, graded_mass,
                       random_demo)
from .perturb import (PerturbationMeasure, PerturbationResult, PerturbationSpec,
                      measure_perturbation, perturb_operator, perturb_rhs)
from .opprec import (ConditionConstants, PreconditionedSystem, apply_preconditioned,
                     assemble_system, biparam_factor, coercivity_constants,
                     condition_constants, pa_matrix)
from .fov import (CarlemanDiagnostics, FovSample, carleman_diagnostics,
                  coercivity_check, field_of_values)
from .krylov import (CgErrorHistory, ResidualHistory, SolveConfig, cg_solve,
                     gmres_solve, residual_cross_check)
from .bounds import (BoundReport, StrangStudy, check_cg_elliptic,
                     check_condition_bounds, check_gmres_linear,
                     check_gmres_superlinear, strang_study, sweep)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
