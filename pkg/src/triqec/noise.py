"""Correlated random-field dephasing of the three spins.

The noise model: each spin k accumulates a random phase chi^k about a fixed
transverse axis, and the vector chi is multivariate Gaussian with covariance
C*t (C in rad^2/s).  A delta-correlated field makes a single Gaussian draw
per trajectory per evolution period exact, so no time stepping of the field
is ever performed.

Two routes through the average are provided and kept independent so they can
cross-validate each other:

* ``apply_channel_analytic`` computes the exact Gaussian average.  In the
  eigenbasis of the dephasing axis every matrix element connecting states
  with signed eigenvalue-difference vector eps in {-1, 0, +1}^3 is damped by
  exp(-(t/2) eps^T C eps); axis-diagonal elements are fixed points.
* ``apply_channel_mc`` draws phase vectors, builds the exact unitary for each
  sample, and averages the conjugated states directly.

Monte Carlo reproducibility: the phases come from a counter-based Philox
stream keyed by the seed, drawn in one deterministic block, and the reduction
sums fixed-size blocks in index order, so results are bit-identical no matter
how many workers split the blocks.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .operators import IDENTITY2, PAULI, kron3

#: Samples per reduction block; fixed so the summation order never varies.
BLOCK = 4096

#: Unitary that maps Ix to Iz under conjugation (a +pi/2 rotation about y),
#: used to reduce the x-axis channel to the diagonal z-axis primitive.
_TO_Z_FRAME = kron3(*[np.array([[1, 1], [-1, 1]], dtype=complex) / np.sqrt(2)] * 3)

#: Per-basis-state signs of 2Iz for each spin, shape (8, 3).
_Z_SIGNS = np.array(
    [[1 - 2 * ((idx >> bit) & 1) for bit in (2, 1, 0)] for idx in range(8)], dtype=float
)


class CovarianceError(ValueError):
    """Covariance matrix that is not symmetric positive semidefinite."""


def validate_covariance(cov) -> np.ndarray:
    """Validate a 3x3 dephasing-rate covariance matrix and return a copy.

    Checks symmetry, nonnegative diagonal, the Cauchy-Schwarz bound on the
    off-diagonal entries, and positive semidefiniteness (eigenvalues at worst
    -1e-12 at unit scale).
    """
    c = np.array(cov, dtype=float)
    if c.shape != (3, 3):
        raise CovarianceError(f"covariance must be 3x3, got shape {c.shape}")
    if not np.isfinite(c).all():
        raise CovarianceError("covariance has non-finite entries")
    tol = 1e-12 * max(1.0, float(np.abs(c).max()))
    if np.abs(c - c.T).max() > tol:
        raise CovarianceError("covariance is not symmetric")
    for j in range(3):
        if c[j, j] < -tol:
            raise CovarianceError(f"variance c[{j},{j}] = {float(c[j, j])!r} is negative")
    for j in range(3):
        for k in range(j + 1, 3):
            bound = np.sqrt(max(c[j, j], 0.0) * max(c[k, k], 0.0))
            if abs(c[j, k]) > bound + max(tol, 1e-12 * bound):
                raise CovarianceError(
                    f"cross-rate c[{j},{k}] = {float(c[j, k])!r} exceeds the "
                    f"Cauchy-Schwarz bound {float(bound)!r}"
                )
    lowest = float(np.linalg.eigvalsh(c).min())
    if lowest < -tol:
        raise CovarianceError(
            f"covariance is not positive semidefinite: eigenvalue {lowest!r} < 0"
        )
    return c


def totally_correlated(tau: float) -> np.ndarray:
    """Covariance with every entry 2/tau: one field shared by all spins."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return np.full((3, 3), 2.0 / tau)


def uncorrelated(tau: float) -> np.ndarray:
    """Diagonal covariance 2/tau: independent, identically distributed fields."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return np.diag(np.full(3, 2.0 / tau))


def effective_covariance(model: str, tau: float | None = None, matrix=None) -> np.ndarray:
    """Build a covariance from a named model or validate a custom one.

    ``model`` is "totally-correlated" (alias "correlated"), "uncorrelated",
    or "custom".  Named models need ``tau`` > 0; "custom" validates
    ``matrix`` for symmetry and positive semidefiniteness.
    """
    if model in ("totally-correlated", "correlated"):
        return totally_correlated(_require_tau(tau))
    if model == "uncorrelated":
        return uncorrelated(_require_tau(tau))
    if model == "custom":
        if matrix is None:
            raise ValueError("custom model requires a covariance matrix")
        return validate_covariance(matrix)
    raise ValueError(f"unknown covariance model {model!r}")


def _require_tau(tau: float | None) -> float:
    if tau is None or tau <= 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return float(tau)


@dataclass(frozen=True, eq=False)
class NoiseChannel:
    """A dephasing channel: covariance, axis, and how to average over it.

    ``kind`` is "analytic" for the exact Gaussian average or "monte-carlo"
    for sampled trajectories (which then requires ``samples`` >= 1).
    """

    covariance: np.ndarray
    axis: str = "x"
    kind: str = "analytic"
    samples: int | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "covariance", validate_covariance(self.covariance))
        if self.axis not in ("x", "z"):
            raise ValueError(f"axis must be 'x' or 'z', got {self.axis!r}")
        if self.kind not in ("analytic", "monte-carlo"):
            raise ValueError(f"kind must be 'analytic' or 'monte-carlo', got {self.kind!r}")
        if self.kind == "monte-carlo" and (self.samples is None or self.samples < 1):
            raise ValueError("monte-carlo channel requires samples >= 1")


def _sqrt_factor(sigma: np.ndarray) -> np.ndarray:
    # Symmetric square root via eigendecomposition; tolerates rank-deficient
    # covariances (Cholesky would fail) by clamping tiny negatives to zero.
    eigvals, eigvecs = np.linalg.eigh(sigma)
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def sample_phases(
    cov, t: float, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw accumulated phase vectors chi ~ N(0, C*t).

    Returns shape (3,) or (size, 3).
    """
    c = validate_covariance(cov)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    loads = _sqrt_factor(c * t)
    draws = rng.standard_normal(3 if size is None else (size, 3))
    return draws @ loads.T


def phase_stream(cov, t: float, seed: int, samples: int) -> np.ndarray:
    """Deterministic (samples, 3) phase block from a counter-based stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    return sample_phases(cov, t, rng, size=samples)


def random_propagator(chi, axis: str = "x") -> np.ndarray:
    """Exact unitary exp(-i sum_k chi^k I_axis^k) for one phase vector."""
    return _propagator_batch(np.asarray(chi, dtype=float).reshape(1, 3), axis)[0]


def _propagator_batch(chis: np.ndarray, axis: str) -> np.ndarray:
    # (n, 3) phase vectors -> (n, 8, 8) product unitaries, built from the
    # closed form cos(chi/2) - i sin(chi/2) sigma per spin.
    if axis not in PAULI:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    half = chis / 2.0
    singles = (
        np.cos(half)[..., None, None] * IDENTITY2
        - 1j * np.sin(half)[..., None, None] * PAULI[axis]
    )
    out = np.einsum("nab,ncd->nacbd", singles[:, 0], singles[:, 1]).reshape(-1, 4, 4)
    out = np.einsum("nab,ncd->nacbd", out, singles[:, 2]).reshape(-1, 8, 8)
    return out


def dephasing_factors(cov, t: float) -> np.ndarray:
    """The 8x8 damping factors exp(-(t/2) eps^T C eps) in the z eigenbasis.

    Entry (r, c) multiplies the matrix element |r><c|, with eps the per-spin
    difference of 2Iz signs between the two basis states, halved.
    """
    c = validate_covariance(cov)
    eps = (_Z_SIGNS[:, None, :] - _Z_SIGNS[None, :, :]) / 2.0
    quad = np.einsum("rcj,jk,rck->rc", eps, c, eps)
    return np.exp(-0.5 * t * quad)


def apply_channel_analytic(rho: np.ndarray, cov, t: float, axis: str = "x") -> np.ndarray:
    """Exact Gaussian-averaged dephasing channel.

    Completely positive and trace preserving; operators diagonal in the
    dephasing-axis eigenbasis are fixed points.  The z-axis channel damps
    matrix elements directly; the x-axis channel conjugates into the z frame
    first.
    """
    rho = np.asarray(rho, dtype=complex)
    factors = dephasing_factors(cov, t)
    if axis == "z":
        return factors * rho
    if axis == "x":
        rotated = _TO_Z_FRAME @ rho @ _TO_Z_FRAME.conj().T
        return _TO_Z_FRAME.conj().T @ (factors * rotated) @ _TO_Z_FRAME
    raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")


def apply_channel_mc(rho: np.ndarray, channel: NoiseChannel, t: float) -> np.ndarray:
    """Monte Carlo dephasing: mean over samples of U(chi) rho U(chi)†.

    Deterministic for a fixed seed regardless of the worker count.
    """
    if channel.kind != "monte-carlo":
        raise ValueError("apply_channel_mc requires a monte-carlo channel")
    rho = np.asarray(rho, dtype=complex)
    chis = phase_stream(channel.covariance, t, channel.seed, channel.samples)

    def block_sum(block: np.ndarray) -> np.ndarray:
        units = _propagator_batch(block, channel.axis)
        return np.einsum("nij,jk,nlk->il", units, rho, units.conj())

    blocks = [chis[start : start + BLOCK] for start in range(0, len(chis), BLOCK)]
    if channel.workers > 1:
        with ThreadPoolExecutor(max_workers=channel.workers) as pool:
            partials = list(pool.map(block_sum, blocks))
    else:
        partials = [block_sum(block) for block in blocks]
    total = np.zeros_like(rho)
    for part in partials:
        total += part
    return total / channel.samples
