"""Shared helpers: seeded random corpora and independent brute-force oracles."""

from __future__ import annotations

import numpy as np


def random_psd(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """A generic symmetric positive semidefinite 3x3 matrix."""
    a = rng.normal(size=(3, 3))
    return scale * (a @ a.T)


def random_density(rng: np.random.Generator, dim: int = 8) -> np.ndarray:
    """A full-rank random density matrix (Wishart normalized to unit trace)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_operator(rng: np.random.Generator, dim: int = 8) -> np.ndarray:
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


def brute_partial_trace(rho: np.ndarray) -> np.ndarray:
    """Loop-based partial trace over spins 2 and 3 (oracle, no reshaping)."""
    out = np.zeros((2, 2), dtype=complex)
    for a in range(2):
        for b in range(2):
            for j in range(2):
                for k in range(2):
                    out[a, b] += rho[4 * a + 2 * j + k, 4 * b + 2 * j + k]
    return out


def richardson_first_derivative(f, t: float, h: float) -> float:
    """Central first difference with one Richardson extrapolation step."""

    def central(step: float) -> float:
        return (f(t + step) - f(t - step)) / (2.0 * step)

    return (4.0 * central(h) - central(2.0 * h)) / 3.0


def richardson_second_derivative(f, t: float, h: float) -> float:
    """Central second difference with one Richardson extrapolation step."""

    def central(step: float) -> float:
        return (f(t + step) - 2.0 * f(t) + f(t - step)) / step**2

    return (4.0 * central(h) - central(2.0 * h)) / 3.0


def richardson_third_derivative(f, t: float, h: float) -> float:
    """Central third difference with one Richardson extrapolation step."""

    def central(step: float) -> float:
        return (
            f(t + 2 * step) - 2.0 * f(t + step) + 2.0 * f(t - step) - f(t - 2 * step)
        ) / (2.0 * step**3)

    return (4.0 * central(h) - central(2.0 * h)) / 3.0
