import numpy as np

from pglab import matio
from pglab.rng import Lcg64


def test_matrix_roundtrip_complex_general(tmp_path):
    m = Lcg64(1).complex_matrix(5, 3)
    path = tmp_path / "m.mtx"
    matio.write_matrix(path, m)
    back = matio.read_matrix(path)
    np.testing.assert_allclose(back, m, atol=1e-15)


def test_matrix_roundtrip_hermitian(tmp_path):
    r = Lcg64(2).complex_matrix(4, 4)
    m = r + r.conj().T
    path = tmp_path / "h.mtx"
    matio.write_matrix(path, m)
    assert b"hermitian" in path.read_bytes().splitlines()[0]
    np.testing.assert_allclose(matio.read_matrix(path), m, atol=1e-15)


def test_matrix_real_written_as_real(tmp_path):
    m = np.diag([1.0, 2.0]).astype(complex)
    path = tmp_path / "r.mtx"
    matio.write_matrix(path, m)
    header = path.read_bytes().splitlines()[0]
    assert b"real" in header
    np.testing.assert_allclose(matio.read_matrix(path), m.real, atol=0)


def test_vector_roundtrip(tmp_path):
    v = Lcg64(3).complex_vector(7)
    path = tmp_path / "v.csv"
    matio.write_vector(path, v)
    np.testing.assert_allclose(matio.read_vector(path), v, atol=0)
