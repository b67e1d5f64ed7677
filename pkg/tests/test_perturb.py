import warnings

import numpy as np
import pytest

from pglab.perturb import (MODES, PerturbationSpec, TruncationInfeasibleWarning,
                           measure_perturbation, perturb_operator, perturb_rhs)
from pglab.problems import GalerkinOperator, circle_fourier
from pglab.rng import Lcg64
from pglab.spaces import DiscreteSpace, dual_norm


def _identity_op(n=4):
    sp = DiscreteSpace("I", np.eye(n))
    return GalerkinOperator.assemble(np.eye(n, dtype=complex), sp, sp)


def _random_op(seed, n=8, shift=3.0):
    rng = Lcg64(seed)
    a = rng.complex_matrix(n, n) + shift * np.eye(n)
    r = rng.complex_matrix(n, n)
    sp = DiscreteSpace(f"rand{seed}", r @ r.conj().T + n * np.eye(n))
    return GalerkinOperator.assemble(a, sp, sp)


def test_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec(1.0)
    with pytest.raises(ValueError):
        PerturbationSpec(0.1, mode="bogus")


def test_zero_level_is_identity():
    op = _random_op(0)
    for mode in MODES:
        res = perturb_operator(op, PerturbationSpec(0.0, mode, 1))
        assert res.op is op
        assert res.nu_actual == 0.0


def test_dense_random_hits_level_exactly():
    op = _identity_op()
    res = perturb_operator(op, PerturbationSpec(0.3, "denseRandom", 2))
    assert np.linalg.norm(res.op.matrix - op.matrix, 2) == pytest.approx(0.3, abs=1e-12)
    assert measure_perturbation(op, res.op).nu_actual == pytest.approx(0.3, abs=1e-12)


def test_truncation_infeasible_returns_copy_with_warning():
    sp = DiscreteSpace("I3", np.eye(3))
    op = GalerkinOperator.assemble(np.diag([1.0, 2.0, 4.0]).astype(complex), sp, sp)
    # dropping the smallest singular direction already costs nu = 1/gamma = 1
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = perturb_operator(op, PerturbationSpec(0.3, "svdTruncation", 0))
    assert res.truncation_infeasible
    assert any(issubclass(w.category, TruncationInfeasibleWarning) for w in caught)
    np.testing.assert_allclose(res.op.matrix, op.matrix, atol=0)


def test_truncation_infeasibility_is_structural():
    # dropping even the smallest singular direction of a nonsingular operator
    # costs sigma_min / gamma = 1, which no admissible level < 1 covers; the
    # rank search must therefore always land on the warned no-op path
    sp = DiscreteSpace("I3", np.eye(3))
    for diag in ([10.0, 5.0, 0.1], [10.0, 5.0, 1e-3]):
        op = GalerkinOperator.assemble(np.diag(diag).astype(complex), sp, sp)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationInfeasibleWarning)
            res = perturb_operator(op, PerturbationSpec(0.9, "svdTruncation", 0))
        assert res.truncation_infeasible
        np.testing.assert_allclose(res.op.matrix, op.matrix, atol=0)


def test_entry_drop_zeroes_small_entries():
    sp = DiscreteSpace("I4", np.eye(4))
    a = np.diag([4.0, 4.0, 4.0, 4.0]).astype(complex)
    a[0, 1] = a[1, 0] = 1e-3
    a[2, 3] = a[3, 2] = 2e-3
    op = GalerkinOperator.assemble(a, sp, sp)
    res = perturb_operator(op, PerturbationSpec(0.01, "entryDrop", 0))
    assert measure_perturbation(op, res.op).nu_actual == pytest.approx(0.01, abs=1e-12)
    # the large diagonal is untouched; small couplings took the hit
    np.testing.assert_allclose(np.diag(res.op.matrix), np.diag(a), atol=1e-12)
    changed = np.abs(res.op.matrix - a)
    assert changed[0, 1] > 0 or changed[2, 3] > 0


def test_hermitian_structure_preserved():
    rng = Lcg64(5)
    r = rng.complex_matrix(6, 6)
    herm = r @ r.conj().T + 6 * np.eye(6)
    sp = DiscreteSpace("h", np.eye(6))
    op = GalerkinOperator.assemble(herm, sp, sp)
    for mode in ("denseRandom", "entryDrop"):
        res = perturb_operator(op, PerturbationSpec(0.4, mode, 3))
        assert np.linalg.norm(res.op.matrix - res.op.matrix.conj().T) <= 1e-10
        # ellipticity survives: gamma_nu >= gamma (1 - nu) > 0
        assert res.op.gamma >= op.gamma * (1 - 0.4) - 1e-10


def test_measure_examples():
    op = _identity_op(3)
    assert measure_perturbation(op, op).nu_actual == 0.0
    sp = op.domain
    shrunk = GalerkinOperator.assemble(0.8 * np.eye(3, dtype=complex), sp, sp)
    assert measure_perturbation(op, shrunk).nu_actual == pytest.approx(0.2, abs=1e-12)
    two = GalerkinOperator.assemble(np.diag([2.0, 2.0]).astype(complex),
                                    DiscreteSpace("i2", np.eye(2)),
                                    DiscreteSpace("i2", np.eye(2)))
    bent = GalerkinOperator.assemble(np.diag([2.0, 1.0]).astype(complex),
                                     two.domain, two.range_dual)
    assert measure_perturbation(two, bent).nu_actual == pytest.approx(0.5, abs=1e-12)


def test_measured_level_never_exceeds_requested():
    for seed in range(12):
        op = _random_op(seed)
        nu = 0.05 + 0.85 * Lcg64(seed + 100).uniform()
        for mode in MODES:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationInfeasibleWarning)
                res = perturb_operator(op, PerturbationSpec(nu, mode, seed))
            measured = measure_perturbation(op, res.op).nu_actual
            assert measured <= nu + 1e-10


def test_stability_of_infsup_and_continuity():
    # 50 randomized constructions: gamma_nu >= gamma (1 - nu) and
    # ||a_nu|| <= ||a|| + nu gamma
    rng = Lcg64(77)
    for t in range(50):
        op = _random_op(t, n=4 + int(rng.uniform() * 9))
        nu = 0.9 * rng.uniform()
        mode = MODES[t % 3]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationInfeasibleWarning)
            res = perturb_operator(op, PerturbationSpec(nu, mode, t))
        assert res.op.gamma >= op.gamma * (1 - nu) - 1e-10
        assert res.op.continuity <= op.continuity + nu * op.gamma + 1e-10


def test_deterministic_in_seed_and_mode():
    op = _random_op(1)
    a1 = perturb_operator(op, PerturbationSpec(0.3, "denseRandom", 9)).op.matrix
    a2 = perturb_operator(op, PerturbationSpec(0.3, "denseRandom", 9)).op.matrix
    a3 = perturb_operator(op, PerturbationSpec(0.3, "denseRandom", 10)).op.matrix
    np.testing.assert_array_equal(a1, a2)
    assert not np.array_equal(a1, a3)


def test_perturb_rhs_examples():
    problem, _ = circle_fourier(4)
    space = problem.op.range_dual
    b = problem.rhs
    np.testing.assert_array_equal(perturb_rhs(b, space, 0.0, 1), b)
    b2 = perturb_rhs(b, space, 0.5, 1)
    ratio = dual_norm(space, b2 - b) / dual_norm(space, b)
    assert ratio == pytest.approx(0.5, abs=1e-12)
    zero = np.zeros(space.dim, dtype=complex)
    np.testing.assert_array_equal(perturb_rhs(zero, space, 0.7, 1), zero)
    # Euclidean case: dual norm is the plain norm
    euclid = DiscreteSpace("e2", np.eye(2))
    b3 = perturb_rhs(np.array([1.0, 0.0], dtype=complex), euclid, 0.5, 2)
    assert np.linalg.norm(b3 - [1.0, 0.0]) == pytest.approx(0.5, abs=1e-12)


def test_space_mismatch_rejected():
    op = _identity_op(3)
    other = GalerkinOperator.assemble(np.eye(3, dtype=complex),
                                      DiscreteSpace("other", np.eye(3)),
                                      DiscreteSpace("other", np.eye(3)))
    with pytest.raises(ValueError):
        measure_perturbation(op, other)
