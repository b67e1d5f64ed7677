"""Matrix Market and CSV interchange for matrices and vectors."""

from __future__ import annotations

import io
import os

import numpy as np
import scipy.io
import scipy.sparse

from . import densela


def write_matrix(path: str | os.PathLike, m: np.ndarray, comment: str = "") -> None:
    """Write a dense complex matrix in Matrix Market array format.

    Hermitian matrices are tagged with the 'hermitian' symmetry qualifier,
    real-valued ones are written with the real field.
    """
    m = np.asarray(m)
    if np.iscomplexobj(m) and np.all(m.imag == 0.0):
        m = m.real.copy()
    symmetry = "general"
    if m.shape[0] == m.shape[1] and m.shape[0] > 0 and densela.is_hermitian(m):
        symmetry = "symmetric" if not np.iscomplexobj(m) else "hermitian"
    scipy.io.mmwrite(os.fspath(path), m, comment=comment, symmetry=symmetry)


def read_matrix(path: str | os.PathLike) -> np.ndarray:
    m = scipy.io.mmread(os.fspath(path))
    if scipy.sparse.issparse(m):
        m = m.toarray()
    return np.asarray(m)


def write_vector(path: str | os.PathLike, v: np.ndarray) -> None:
    """Plain CSV with one 're,im' row per entry, 17 significant digits."""
    v = np.asarray(v, dtype=complex).ravel()
    buf = io.StringIO()
    buf.write("re,im\n")
    for z in v:
        buf.write(f"{z.real:.17g},{z.imag:.17g}\n")
    with open(path, "w", newline="") as f:
        f.write(buf.getvalue())


def read_vector(path: str | os.PathLike) -> np.ndarray:
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return rows[:, 0] + 1j * rows[:, 1]
