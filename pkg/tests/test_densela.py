import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pglab import densela
from pglab.rng import Lcg64


def test_hermitian_eigen_diagonal():
    res = densela.hermitian_eigen(np.diag([1.0, 4.0]))
    np.testing.assert_allclose(res.eigenvalues, [4.0, 1.0], atol=1e-14)


def test_hermitian_eigen_identity():
    res = densela.hermitian_eigen(np.eye(7))
    np.testing.assert_allclose(res.eigenvalues, np.ones(7), atol=1e-14)


def test_hermitian_eigen_hand_2x2():
    # characteristic polynomial of [[2,1],[1,2]]: (2-l)^2 - 1 = 0 -> l in {3, 1}
    res = densela.hermitian_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(res.eigenvalues, [3.0, 1.0], atol=1e-10)
    v = res.eigenvectors
    np.testing.assert_allclose(v.conj().T @ v, np.eye(2), atol=1e-10)


def test_hermitian_eigen_rejects_nonhermitian():
    with pytest.raises(densela.NonHermitianError):
        densela.hermitian_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(densela.NonSquareError):
        densela.hermitian_eigen(np.zeros((2, 3)))


def test_general_eigen_diagonal_complex():
    res = densela.general_eigen(np.diag([2.0, 1j]), validate=True)
    np.testing.assert_allclose(res.eigenvalues, [2.0, 1j], atol=1e-12)


def test_general_eigen_nilpotent():
    res = densela.general_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))
    np.testing.assert_allclose(res.eigenvalues, [0.0, 0.0], atol=1e-12)


def test_general_eigen_companion():
    # companion matrix of z^2 - 3z + 2, roots {2, 1}
    comp = np.array([[0.0, -2.0], [1.0, 3.0]])
    res = densela.general_eigen(comp, validate=True)
    np.testing.assert_allclose(res.eigenvalues, [2.0, 1.0], atol=1e-10)


def test_svd_examples():
    np.testing.assert_allclose(densela.svd(np.diag([3.0, 1.0])).singular_values,
                               [3.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(densela.svd(np.zeros((3, 3))).singular_values,
                               np.zeros(3), atol=0.0)
    # permutation-scaled matrix: singular values are the scalings
    np.testing.assert_allclose(
        densela.svd(np.array([[0.0, 2.0], [1.0, 0.0]])).singular_values,
        [2.0, 1.0], atol=1e-10)


def test_svd_reconstruction():
    m = Lcg64(5).complex_matrix(9, 6)
    res = densela.svd(m, compute_factors=True)
    rec = (res.u * res.singular_values) @ res.vh
    assert np.linalg.norm(m - rec, 2) <= 1e-10 * np.linalg.norm(m, 2)


def test_cholesky_examples():
    np.testing.assert_allclose(densela.cholesky_hpd(np.eye(3)), np.eye(3), atol=0)
    np.testing.assert_allclose(densela.cholesky_hpd(np.diag([4.0, 9.0])),
                               np.diag([2.0, 3.0]), atol=1e-14)
    l = densela.cholesky_hpd(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert l[0, 0] == pytest.approx(np.sqrt(2.0), abs=1e-12)
    np.testing.assert_allclose(l @ l.conj().T, [[2.0, 1.0], [1.0, 2.0]], atol=1e-12)


def test_cholesky_rejects_indefinite():
    with pytest.raises(densela.NotPositiveDefiniteError):
        densela.cholesky_hpd(np.diag([1.0, -1.0]))


def test_solve_examples():
    b = np.array([3.0, -1.0])
    np.testing.assert_allclose(densela.solve_linear(np.eye(2), b), b, atol=0)
    np.testing.assert_allclose(
        densela.solve_linear(np.diag([2.0, 4.0]), np.array([2.0, 4.0])),
        [1.0, 1.0], atol=1e-14)
    # back substitution by hand: [[1,1],[0,1]] x = (2,1) -> x = (1,1)
    np.testing.assert_allclose(
        densela.solve_linear(np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([2.0, 1.0])),
        [1.0, 1.0], atol=1e-14)


def test_solve_rejects_singular():
    with pytest.raises(densela.SingularMatrixError):
        densela.solve_linear(np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([1.0, 0.0]))


def _random_well_conditioned(rng, n):
    m = rng.complex_matrix(n, n)
    return m + 2.0 * np.sqrt(n) * np.eye(n)


def test_solve_residual_on_random_instances():
    rng = Lcg64(7)
    for _ in range(100):
        n = 2 + int(rng.uniform() * 62)
        m = _random_well_conditioned(rng, n)
        assert densela.kappa_2(m) <= 1e4
        rhs = rng.complex_vector(n)
        x = densela.solve_linear(m, rhs)
        res = np.linalg.norm(m @ x - rhs)
        bound = 1e-10 * (np.linalg.norm(m, 2) * np.linalg.norm(x) + np.linalg.norm(rhs))
        assert res <= bound


@settings(max_examples=25, deadline=None, derandomize=True)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=10**6))
def test_hpd_eigen_positive_and_cholesky_succeeds(n, seed):
    r = Lcg64(seed).complex_matrix(n, n)
    m = r @ r.conj().T + 0.1 * np.eye(n)
    res = densela.hermitian_eigen(m)
    assert res.eigenvalues[-1] > 0.0
    densela.cholesky_hpd(m)  # must not raise


@settings(max_examples=25, deadline=None, derandomize=True)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=10**6))
def test_kappa2_dominates_kappa_s(n, seed):
    m = _random_well_conditioned(Lcg64(seed), n)
    assert densela.kappa_2(m) >= densela.kappa_s(m) - 1e-8


def test_svd_matches_eigen_for_normal():
    rng = Lcg64(11)
    for n in (3, 6, 12):
        # unitary similarity of a diagonal makes a normal matrix
        g = rng.complex_matrix(n, n)
        q, _ = np.linalg.qr(g)
        lam = rng.complex_vector(n)
        m = q @ np.diag(lam) @ q.conj().T
        sv = densela.svd(m).singular_values
        mods = np.sort(np.abs(densela.general_eigen(m).eigenvalues))[::-1]
        np.testing.assert_allclose(sv, mods, atol=1e-8)


def test_hermitian_sqrt_pair():
    rng = Lcg64(3)
    r = rng.complex_matrix(8, 8)
    m = r @ r.conj().T + np.eye(8)
    root, inv_root = densela.hermitian_sqrt_pair(m)
    np.testing.assert_allclose(root @ root, m, atol=1e-10)
    np.testing.assert_allclose(root @ inv_root, np.eye(8), atol=1e-10)
    # diagonal fast path agrees
    d = np.diag([1.0, 4.0, 9.0])
    root_d, inv_d = densela.hermitian_sqrt_pair(d)
    np.testing.assert_allclose(root_d, np.diag([1.0, 2.0, 3.0]), atol=0)
    np.testing.assert_allclose(inv_d, np.diag([1.0, 0.5, 1.0 / 3.0]), atol=1e-15)
