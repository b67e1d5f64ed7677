"""Model problem generators.

Four families, each returned fully assembled with analytically known
constants where available:

* ``circle_fourier`` -- opposite-order preconditioning on the unit-circle
  Fourier basis: a stabilized first-kind operator of order +1 preconditioned
  by a smoothing operator of order -1, both diagonal in the Fourier basis.
* ``fredholm_second_kind`` -- piecewise-constant Galerkin discretization of a
  second-kind integral equation with a smooth Gaussian kernel; the compact
  part has square-summable singular values (class index p = 2).
* ``graded_mass`` -- P1 mass/H1 Gram pairs on algebraically graded meshes of
  [0, 1], exposing the mesh dependence of the synthesis constants.
* ``random_demo`` -- the I + scale*E random matrix used for field-of-values
  illustrations.

These concrete families are artifact choices; reports tag results with the
family name so they are never mistaken for canonical constructions.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace

import numpy as np

from . import densela, matio
from .rng import Lcg64
from .spaces import DiscreteSpace, MeshMeta


@dataclass(frozen=True)
class GalerkinOperator:
    """A matrix tagged with its domain space and the space whose dual it maps
    into, plus cached stability constants.

    ``gamma`` is the discrete inf-sup constant sigma_min(Hy^-1/2 A Hx^-1/2),
    ``continuity`` the matching sigma_max; both are exact at the discrete
    level and serve as computable surrogates for the form constants.
    """

    matrix: np.ndarray
    domain: DiscreteSpace
    range_dual: DiscreteSpace
    gamma: float
    continuity: float

    @classmethod
    def assemble(cls, matrix, domain: DiscreteSpace, range_dual: DiscreteSpace
                 ) -> "GalerkinOperator":
        matrix = np.asarray(matrix)
        if matrix.shape != (range_dual.dim, domain.dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match spaces "
                f"({range_dual.dim}, {domain.dim})"
            )
        gamma, continuity = _stability_constants(matrix, domain.gram, range_dual.gram)
        return cls(matrix, domain, range_dual, gamma, continuity)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def bnb_condition(self) -> float:
        return self.continuity / self.gamma


def _stability_constants(a: np.ndarray, gram_x: np.ndarray, gram_y: np.ndarray
                         ) -> tuple[float, float]:
    """Extremal singular values of Hy^-1/2 A Hx^-1/2; closed form when all
    three matrices are diagonal."""
    if (densela._is_diagonal(a) and densela._is_diagonal(gram_x)
            and densela._is_diagonal(gram_y)):
        dx = np.diag(gram_x).real
        dy = np.diag(gram_y).real
        if dx.min() <= 0 or dy.min() <= 0:
            raise densela.NotPositiveDefiniteError("diagonal Gram entry <= 0")
        vals = np.abs(np.diag(a)) / np.sqrt(dy * dx)
        return float(vals.min()), float(vals.max())
    _, inv_x = densela.hermitian_sqrt_pair(gram_x)
    _, inv_y = densela.hermitian_sqrt_pair(gram_y)
    s = densela.svd(inv_y @ a @ inv_x).singular_values
    return float(s[-1]), float(s[0])


@dataclass(frozen=True)
class ProblemInstance:
    """A linear system with its operator, load vector and optional extras:
    a reference solution, the compact part K with A = N + K for second-kind
    structure, and the class index p of the compact part."""

    op: GalerkinOperator
    rhs: np.ndarray
    family: str
    exact_coeffs: np.ndarray | None = None
    compact_part: np.ndarray | None = None
    carleman_index: float | None = None

    @property
    def dim(self) -> int:
        return self.op.dim


@dataclass(frozen=True)
class PreconditionerSet:
    """The triple (C, M, N) realizing the action P = M^-1 C N^-1.

    ``bubnov`` marks the equal-space case with N = M^H, for which P^-1 is
    Hermitian positive definite and usable as a solver weight.
    """

    c: GalerkinOperator
    m: GalerkinOperator
    n: GalerkinOperator

    bubnov: bool = False

    def __post_init__(self):
        dims = {self.c.dim, self.m.dim, self.n.dim}
        if len(dims) != 1:
            raise ValueError(f"preconditioner blocks disagree in dimension: {dims}")
        # space chaining: C: V->W', M: X->W', N: V->Y'
        if self.c.domain.label != self.n.domain.label:
            raise ValueError("C and N must share their domain space")
        if self.c.range_dual.label != self.m.range_dual.label:
            raise ValueError("C and M must share their range space")
        if self.bubnov and not np.allclose(self.n.matrix, self.m.matrix.conj().T):
            raise ValueError("bubnov flag requires N = M^H")

    @property
    def dim(self) -> int:
        return self.c.dim

    def p_inverse_gram(self) -> np.ndarray:
        """P^-1 = N C^-1 M, validated Hermitian positive definite.

        Only meaningful for the equal-space configuration; exported as a Gram
        matrix for weighted solvers.
        """
        if not self.bubnov:
            raise ValueError("P^-1 is only a Gram matrix in the equal-space case")
        pinv = self.n.matrix @ densela.solve_linear(self.c.matrix, self.m.matrix)
        pinv = 0.5 * (pinv + pinv.conj().T)  # symmetrize round-off
        eig = densela.hermitian_eigen(pinv, compute_vectors=False)
        if eig.eigenvalues[-1] <= 0.0:
            raise densela.NotPositiveDefiniteError(
                f"P^-1 has eigenvalue {eig.eigenvalues[-1]:.3e} <= 0"
            )
        return pinv


class InvalidRadiusError(ValueError):
    pass


def circle_symbols(modes: int, radius: float, c0: float):
    """Fourier symbols of the circle family for wavenumbers -K..K.

    Returns (k, s, w, v): the wavenumbers, the +1/2-order weight
    s_k = (1+k^2)^(1/2), the stabilized first-kind symbol
    w_k = max(|k|, c0)/2 and the smoothing symbol v_k (radius/(2|k|) away
    from the zero mode, -radius*log(radius) at it).
    """
    if modes < 1:
        raise ValueError("need at least one mode")
    if not 0.0 < radius < 1.0:
        raise InvalidRadiusError("radius must lie in (0, 1) for a positive zero-mode symbol")
    if c0 <= 0.0:
        raise ValueError("stabilization constant must be positive")
    k = np.arange(-modes, modes + 1, dtype=float)
    s = np.sqrt(1.0 + k**2)
    w = np.maximum(np.abs(k), c0) / 2.0
    v = np.empty_like(k)
    nz = k != 0
    v[nz] = radius / (2.0 * np.abs(k[nz]))
    v[~nz] = -radius * np.log(radius)
    return k, s, w, v


def circle_fourier(modes: int, radius: float = 0.5, c0: float = 0.5
                   ) -> tuple[ProblemInstance, PreconditionerSet]:
    """Circle family on N = 2*modes+1 Fourier modes.

    The system operator acts from the +1/2-order space into its dual; the
    preconditioner from the -1/2-order space into *its* dual; both pairings
    are identities.  All matrices are diagonal, so every constant is known in
    closed form and the preconditioned symbol product is radius/4 on all
    nonzero modes.
    """
    k, s, w, v = circle_symbols(modes, radius, c0)
    gram_x = np.diag(s)
    gram_v = np.diag(1.0 / s)
    x_space = DiscreteSpace("circle:X", gram_x, sobolev_order=0.5)
    v_space = DiscreteSpace("circle:V", gram_v, sobolev_order=-0.5)

    a = GalerkinOperator.assemble(np.diag(w), x_space, x_space)
    c = GalerkinOperator.assemble(np.diag(v), v_space, v_space)
    eye = np.eye(2 * modes + 1)
    m = GalerkinOperator.assemble(eye, x_space, v_space)
    n = GalerkinOperator.assemble(eye, v_space, x_space)

    rhs = (1.0 + k**2) ** -2.0
    exact = rhs / w
    problem = ProblemInstance(a, rhs.astype(complex), "circle", exact_coeffs=exact.astype(complex))
    pset = PreconditionerSet(c, m, n, bubnov=True)
    return problem, pset


def fredholm_second_kind(n: int, kernel_width: float
                         ) -> tuple[ProblemInstance, PreconditionerSet]:
    """Second-kind family: P0 Galerkin on a uniform mesh of [0, 1].

    The operator is mass + K with K assembled from the smooth kernel
    g(s, t) = exp(-(s - t)^2 / width^2) by midpoint quadrature per element
    pair.  All three preconditioner blocks equal the mass matrix, so the
    preconditioned system is the identity plus the coefficient image of K;
    its singular values are square-summable (p = 2).
    """
    if n < 4:
        raise ValueError("need at least 4 elements")
    if kernel_width <= 0.0:
        raise ValueError("kernel width must be positive")
    h = 1.0 / n
    mid = (np.arange(n) + 0.5) * h
    diff = mid[:, None] - mid[None, :]
    kmat = h * h * np.exp(-(diff / kernel_width) ** 2)
    mass = h * np.eye(n)
    a = mass + kmat

    space = DiscreteSpace("fredholm:L2", mass, mesh=MeshMeta(h, h), sobolev_order=0.0)
    op = GalerkinOperator.assemble(a, space, space)
    pairing = GalerkinOperator.assemble(mass, space, space)
    rhs = np.full(n, h, dtype=complex)  # loads of f(t) = 1 against the P0 basis
    problem = ProblemInstance(
        op, rhs, "fredholm",
        compact_part=kmat.astype(complex), carleman_index=2.0,
    )
    pset = PreconditionerSet(pairing, pairing, pairing, bubnov=True)
    return problem, pset


def graded_mass(n: int, grading: float = 1.0) -> tuple[DiscreteSpace, DiscreteSpace]:
    """P1 spaces on the graded mesh x_i = (i/n)^grading of [0, 1].

    Returns the L2-Gram space and the H1-Gram (mass + stiffness) space on the
    same mesh; element mass/stiffness blocks are assembled in closed form.
    """
    if n < 2:
        raise ValueError("need at least 2 elements")
    if grading < 1.0:
        raise ValueError("grading must be >= 1")
    nodes = (np.arange(n + 1) / n) ** grading
    lengths = np.diff(nodes)
    dim = n + 1
    mass = np.zeros((dim, dim))
    stiff = np.zeros((dim, dim))
    for i, le in enumerate(lengths):
        mass[i:i + 2, i:i + 2] += le / 6.0 * np.array([[2.0, 1.0], [1.0, 2.0]])
        stiff[i:i + 2, i:i + 2] += 1.0 / le * np.array([[1.0, -1.0], [-1.0, 1.0]])
    meta = MeshMeta(float(lengths.min()), float(lengths.max()))
    l2 = DiscreteSpace(f"graded:L2:g={grading:g}", mass, mesh=meta)
    h1 = DiscreteSpace(f"graded:H1:g={grading:g}", mass + stiff, mesh=meta)
    return l2, h1


def random_demo(n: int, scale: float, seed: int) -> np.ndarray:
    """Q = I + scale * E with E drawn entrywise uniform on [0, 1) from the
    package's deterministic generator (row major)."""
    if n < 2:
        raise ValueError("need dimension >= 2")
    e = Lcg64(seed).uniform_matrix(n, n)
    return np.eye(n) + scale * e


def perturbed_problem(problem: ProblemInstance, op: GalerkinOperator,
                      rhs: np.ndarray, pairing_n: np.ndarray | None = None
                      ) -> ProblemInstance:
    """Problem with operator/load replaced; the compact part, when tracked,
    is recomputed so that op = N + compact still holds exactly."""
    compact = problem.compact_part
    if compact is not None and pairing_n is not None:
        compact = op.matrix - pairing_n
    return replace(problem, op=op, rhs=rhs, compact_part=compact, exact_coeffs=None)


def dump_problem(problem: ProblemInstance, pset: PreconditionerSet,
                 outdir: str | os.PathLike, params: dict) -> None:
    """Matrix Market dump plus a JSON sidecar with parameters and cached
    constants."""
    outdir = os.fspath(outdir)
    os.makedirs(outdir, exist_ok=True)
    matio.write_matrix(os.path.join(outdir, "A.mtx"), problem.op.matrix)
    matio.write_matrix(os.path.join(outdir, "C.mtx"), pset.c.matrix)
    matio.write_matrix(os.path.join(outdir, "M.mtx"), pset.m.matrix)
    matio.write_matrix(os.path.join(outdir, "N.mtx"), pset.n.matrix)
    matio.write_matrix(os.path.join(outdir, "gram_x.mtx"), problem.op.domain.gram)
    matio.write_matrix(os.path.join(outdir, "gram_y.mtx"), problem.op.range_dual.gram)
    matio.write_matrix(os.path.join(outdir, "gram_v.mtx"), pset.c.domain.gram)
    matio.write_matrix(os.path.join(outdir, "gram_w.mtx"), pset.c.range_dual.gram)
    matio.write_vector(os.path.join(outdir, "rhs.csv"), problem.rhs)
    if problem.compact_part is not None:
        matio.write_matrix(os.path.join(outdir, "compact.mtx"), problem.compact_part)
    sidecar = {
        "family": problem.family,
        "params": params,
        "dim": problem.dim,
        "constants": {
            "gamma_a": problem.op.gamma,
            "cont_a": problem.op.continuity,
            "gamma_c": pset.c.gamma,
            "cont_c": pset.c.continuity,
            "gamma_m": pset.m.gamma,
            "cont_m": pset.m.continuity,
            "gamma_n": pset.n.gamma,
            "cont_n": pset.n.continuity,
        },
        "carleman_index": problem.carleman_index,
    }
    from .report import dumps_17g
    with open(os.path.join(outdir, "problem.json"), "w") as f:
        f.write(dumps_17g(sidecar))
        f.write("\n")
