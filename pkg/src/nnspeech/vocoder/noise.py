"""Seeded linear congruential noise source for reproducible synthesis."""

import numpy as np

# Numerical Recipes 32-bit constants
_A = 1664525
_C = 1013904223
_M = 1 << 32


def lcg_uniform(n, seed):
    state = seed % _M
    out = np.empty(n)
    for i in range(n):
        state = (_A * state + _C) % _M
        out[i] = state
    return out / _M


def lcg_noise(n, seed):
    """Zero-mean, unit-variance uniform noise from the LCG."""
    return np.sqrt(3.0) * (2.0 * lcg_uniform(n, seed) - 1.0)
