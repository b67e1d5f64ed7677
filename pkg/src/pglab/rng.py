"""Deterministic 64-bit linear congruential generator.

Every stochastic construction in the package (random demo matrices,
perturbation directions, randomized test instances) draws from this stream so
that results are bit-reproducible for a given seed, independent of numpy's
global state.
"""

from __future__ import annotations

import numpy as np

from . import config


class Lcg64:
    """x_{n+1} = (a x_n + c) mod 2^64 with doubles from the top 53 bits."""

    def __init__(self, seed: int):
        self._state = (int(seed) ^ 0x9E3779B97F4A7C15) & config.LCG_MASK
        for _ in range(config.LCG_BURN_IN):
            self.next_u64()

    def next_u64(self) -> int:
        self._state = (config.LCG_MULT * self._state + config.LCG_INC) & config.LCG_MASK
        return self._state

    def uniform(self) -> float:
        """One double, uniform on [0, 1)."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)])

    def uniform_matrix(self, rows: int, cols: int) -> np.ndarray:
        """Row-major matrix of uniforms on [0, 1)."""
        return self.uniforms(rows * cols).reshape(rows, cols)

    def symmetric_uniforms(self, n: int) -> np.ndarray:
        """Uniforms on [-1, 1)."""
        return 2.0 * self.uniforms(n) - 1.0

    def complex_matrix(self, rows: int, cols: int) -> np.ndarray:
        """Entries with real/imag parts uniform on [-1, 1)."""
        re = self.symmetric_uniforms(rows * cols)
        im = self.symmetric_uniforms(rows * cols)
        return (re + 1j * im).reshape(rows, cols)

    def complex_vector(self, n: int) -> np.ndarray:
        return self.complex_matrix(1, n).ravel()
