import numpy as np
import pytest

from pglab import densela
from pglab.fov import (carleman_diagnostics, coercivity_check, convex_hull,
                       field_of_values, point_in_hull)
from pglab.opprec import assemble_system, pa_matrix
from pglab.problems import circle_fourier, fredholm_second_kind, random_demo
from pglab.rng import Lcg64


def test_fov_real_segment():
    # normal matrix: the set is the convex hull of the spectrum, here [1, 3]
    s = field_of_values(np.diag([1.0, 3.0]), None, 64)
    assert s.v_h == pytest.approx(1.0, abs=1e-10)
    assert not s.contains_zero
    assert np.max(s.boundary_points.real) == pytest.approx(3.0, abs=1e-10)
    assert np.max(np.abs(s.boundary_points.imag)) <= 1e-8


def test_fov_identity_in_any_gram():
    rng = Lcg64(1)
    r = rng.complex_matrix(4, 4)
    gram = r @ r.conj().T + 4 * np.eye(4)
    s = field_of_values(np.eye(4), gram, 64)
    assert s.v_h == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(s.boundary_points, np.ones(64), atol=1e-8)


def test_fov_jordan_block_disk():
    # classical numerical range of the 2x2 nilpotent block: disk of radius 1/2
    s = field_of_values(np.array([[0.0, 1.0], [0.0, 0.0]]), None, 360)
    assert s.contains_zero and s.v_h == 0.0
    np.testing.assert_allclose(s.support_values, 0.5, atol=1e-10)
    np.testing.assert_allclose(np.abs(s.boundary_points), 0.5, atol=1e-6)


def test_fov_matches_bruteforce_rayleigh_sampling():
    # independent oracle: random Rayleigh quotients must land inside the
    # sampled support halfplanes
    q = np.array([[0.0, 1.0], [0.0, 0.0]])
    s = field_of_values(q, None, 180)
    rng = Lcg64(3)
    for _ in range(300):
        u = rng.complex_vector(2)
        z = np.vdot(u, q @ u) / np.vdot(u, u)
        re = (np.exp(-1j * s.angles) * z).real
        assert np.all(re <= s.support_values + 1e-10)


def test_fov_gram_transform_consistency():
    # computing in the Gram geometry equals computing on the explicitly
    # transformed matrix in the Euclidean geometry
    rng = Lcg64(5)
    q = rng.complex_matrix(6, 6)
    r = rng.complex_matrix(6, 6)
    gram = r @ r.conj().T + 6 * np.eye(6)
    root, inv_root = densela.hermitian_sqrt_pair(gram)
    s1 = field_of_values(q, gram, 128)
    s2 = field_of_values(root @ q @ inv_root, None, 128)
    np.testing.assert_allclose(s1.support_values, s2.support_values, atol=1e-8)
    assert np.max(np.abs(s1.boundary_points - s2.boundary_points)) <= 1e-8


def test_fov_requires_enough_samples_and_hpd_gram():
    with pytest.raises(ValueError):
        field_of_values(np.eye(2), None, 4)
    with pytest.raises(densela.NotPositiveDefiniteError):
        field_of_values(np.eye(2), np.diag([1.0, -1.0]), 64)


def test_spectral_containment_random_and_model():
    rng = Lcg64(9)
    matrices = [rng.complex_matrix(n, n) for n in (3, 5, 8, 13, 21, 32)]
    matrices += [rng.complex_matrix(8, 8) + 2 * np.eye(8) for _ in range(14)]
    grams = [None] * len(matrices)
    for problem, pset in (circle_fourier(8), fredholm_second_kind(16, 0.4)):
        sys_ = assemble_system(problem, pset)
        matrices.append(pa_matrix(sys_))
        grams.append(sys_.x_space.gram)
    for q, gram in zip(matrices, grams):
        s = field_of_values(q, gram, 256)
        hull = convex_hull(s.boundary_points)
        for lam in densela.general_eigen(q).eigenvalues:
            assert point_in_hull(lam, hull, 1e-6)


def test_boundary_inside_norm_disk_and_convex():
    rng = Lcg64(13)
    for seed in range(5):
        q = Lcg64(seed).complex_matrix(7, 7)
        s = field_of_values(q, None, 256)
        # radius bound: every boundary point within the spectral-norm disk
        assert np.max(np.abs(s.boundary_points)) <= densela.spectral_norm(q) + 1e-8
        # convexity: the support function certifies it; cross products of the
        # hull of boundary points must not flag concavities beyond tolerance
        hull = convex_hull(s.boundary_points)
        scale = max(np.abs(s.boundary_points).max(), 1.0)
        for i in range(len(hull)):
            a, b, c = hull[i - 1], hull[i], hull[(i + 1) % len(hull)]
            cross = ((b - a).conjugate() * (c - b)).imag
            assert cross >= -1e-10 * scale**2


def test_coercivity_check_hpd():
    rng = Lcg64(2)
    r = rng.complex_matrix(5, 5)
    q = r @ r.conj().T + np.eye(5)
    rep = coercivity_check(q, None, samples=128)
    lam_min = densela.hermitian_eigen(q).eigenvalues[-1]
    assert rep.elliptic
    assert rep.h_normal
    assert rep.v_h == pytest.approx(lam_min, rel=1e-8)


def test_coercivity_check_normal_segment():
    rep = coercivity_check(np.diag([1.0, 1j]), None, samples=720)
    assert rep.h_normal
    # hull of {1, i}: segment at distance 1/sqrt(2) from the origin
    assert rep.v_h == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-8)
    assert rep.elliptic


def test_random_demo_zero_in_fov_but_not_in_spectral_hull():
    q = random_demo(40, 0.5, 1)
    s = field_of_values(q, None, 360)
    assert s.contains_zero
    hull = convex_hull(densela.general_eigen(q).eigenvalues)
    assert not point_in_hull(0.0 + 0.0j, hull, 0.0)


def test_carleman_hand_examples():
    k = np.diag([1.0, 0.5, 0.25])
    d = carleman_diagnostics(k, np.eye(3), np.eye(3), 2.0)
    assert d.partial_means[1] == pytest.approx(0.75, abs=1e-12)
    assert d.carleman_norm == pytest.approx(np.sqrt(21.0) / 4.0, abs=1e-12)
    z = carleman_diagnostics(np.zeros((3, 3)), np.eye(3), np.eye(3), 2.0)
    assert z.carleman_norm == 0.0
    np.testing.assert_allclose(z.partial_means, 0.0, atol=0)


def test_carleman_norm_dominates_sigma1_and_p0_reports_norm():
    k = Lcg64(4).complex_matrix(6, 6)
    d2 = carleman_diagnostics(k, np.eye(6), np.eye(6), 2.0)
    assert d2.carleman_norm >= d2.singular_values[0] - 1e-12
    d0 = carleman_diagnostics(k, np.eye(6), np.eye(6), 0.0)
    assert d0.carleman_norm == pytest.approx(d2.singular_values[0])


def test_partial_means_nonincreasing_and_tail_bound():
    problem, pset = fredholm_second_kind(32, 0.2)
    d = carleman_diagnostics(problem.compact_part, pset.m.matrix,
                             problem.op.domain.gram, 2.0)
    assert np.all(np.diff(d.partial_means) <= 1e-15)
    k = np.arange(1, len(d.partial_means) + 1)
    assert np.all(np.sqrt(k) * d.partial_means <= d.carleman_norm + 1e-8)
