"""Operator algebra for a system of three spin-1/2 nuclei.

Everything lives on the 8-dimensional Hilbert space spin1 (x) spin2 (x) spin3,
with basis kets ordered |d1 d2 d3> (spin 1 is the most significant factor and
d = 0 comes first).  |0> is the +1/2 eigenstate of Iz, so the idempotent
projector (1 + 2Iz)/2 selects it.  Operators are dense complex ndarrays; all
functions here are pure and never mutate their inputs.
"""

from __future__ import annotations

from itertools import product
from typing import NamedTuple

import numpy as np

DIM = 8
SPINS = (1, 2, 3)
AXES = ("x", "y", "z")

#: Ancilla z-basis sectors in the order (+,+), (+,-), (-,+), (-,-).
ANCILLA_SECTORS = ((+1, +1), (+1, -1), (-1, +1), (-1, -1))

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
IDENTITY2 = np.eye(2, dtype=complex)
IDENTITY8 = np.eye(DIM, dtype=complex)

# Tolerances: exact operator algebra is held to 1e-12; composed pipelines and
# statistically averaged states get the looser 1e-9 / -1e-9 bounds.
ALGEBRA_TOL = 1e-12
STATE_TOL = 1e-9


class NormalizationError(ValueError):
    """State amplitudes that fail the unit-norm requirement."""


class BlochVector(NamedTuple):
    """Expectation values (<2Ix>, <2Iy>, <2Iz>) of a single spin."""

    x: float
    y: float
    z: float


def kron3(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    return np.kron(np.kron(a, b), c)


def embed(op: np.ndarray, spin: int) -> np.ndarray:
    """Embed a 2x2 single-spin operator into the three-spin space."""
    if spin not in SPINS:
        raise ValueError(f"spin index must be 1, 2 or 3, got {spin!r}")
    factors = [IDENTITY2, IDENTITY2, IDENTITY2]
    factors[spin - 1] = np.asarray(op, dtype=complex)
    return kron3(*factors)


def angular_momentum(spin: int, axis: str) -> np.ndarray:
    """Angular momentum operator I_axis of one spin, in units of hbar.

    Hermitian with eigenvalues +-1/2; (2 I_axis)^2 is the identity.
    """
    if axis not in PAULI:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    return embed(PAULI[axis] / 2, spin)


def idempotent(spin: int, sign: int) -> np.ndarray:
    """Projector (1 + sign * 2Iz)/2 onto a spin's z eigenstate.

    sign = +1 selects |0> (spin up along z), sign = -1 selects |1>.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    return embed((IDENTITY2 + sign * PAULI["z"]) / 2, spin)


def ancilla_projector(sign2: int, sign3: int) -> np.ndarray:
    """Product of the two ancilla idempotents for one z-basis sector."""
    return idempotent(2, sign2) @ idempotent(3, sign3)


def product_operator(axes: tuple[str | None, str | None, str | None]) -> np.ndarray:
    """One element of the trace-orthogonal product-operator basis.

    ``axes`` gives the Cartesian component for each spin, with None for the
    identity.  The normalization carries a factor of 2 per non-identity spin
    (i.e. 1, 2I_a, 4I_aI_b, 8I_aI_bI_c), so every element squares to 1 and
    tr(P_i P_j) = 8 delta_ij.
    """
    factors = [IDENTITY2 if a is None else PAULI[a] for a in axes]
    return kron3(*factors)


def product_basis() -> list[tuple[tuple[str | None, str | None, str | None], np.ndarray]]:
    """All 64 product operators, keyed by their per-spin axis labels."""
    return [(axes, product_operator(axes)) for axes in product((None, "x", "y", "z"), repeat=3)]


def polar_amplitudes(theta: float, phi: float) -> tuple[complex, complex]:
    """Superposition amplitudes (alpha, beta) of the state at polar angles.

    The state is the ground state rotated by theta about x then phi about z,
    which lands the Bloch vector at (sin(theta)sin(phi), -sin(theta)cos(phi),
    cos(theta)) in the (<2Ix>, <2Iy>, <2Iz>) convention used here.
    """
    return (
        np.cos(theta / 2) * np.exp(-0.5j * phi),
        -1j * np.sin(theta / 2) * np.exp(0.5j * phi),
    )


def pure_data_state(alpha: complex, beta: complex) -> np.ndarray:
    """Density matrix of data spin alpha|0> + beta|1> with ground-state ancillae.

    Returns the rank-1 8x8 state (alpha|000> + beta|100>) times its adjoint.

    Raises
    ------
    NormalizationError
        If |alpha|^2 + |beta|^2 deviates from 1 beyond tolerance.
    """
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > STATE_TOL:
        raise NormalizationError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
    ket = np.zeros(DIM, dtype=complex)
    ket[0b000] = alpha
    ket[0b100] = beta
    return np.outer(ket, ket.conj())


def data_state_from_bloch(bloch) -> np.ndarray:
    """2x2 data-spin density matrix with the given (<2Ix>, <2Iy>, <2Iz>)."""
    x, y, z = bloch
    r2 = x * x + y * y + z * z
    if r2 > 1.0 + STATE_TOL:
        raise NormalizationError(f"Bloch vector has norm {np.sqrt(r2)!r} > 1")
    return 0.5 * (IDENTITY2 + x * PAULI["x"] + y * PAULI["y"] + z * PAULI["z"])


def partial_trace_ancillae(rho: np.ndarray) -> np.ndarray:
    """Trace out spins 2 and 3, leaving the 2x2 data-spin operator.

    Defined for any 8x8 operator; preserves the trace.
    """
    r = np.asarray(rho)
    if r.shape != (DIM, DIM):
        raise ValueError(f"expected an 8x8 operator, got shape {r.shape}")
    return r.reshape(2, 4, 2, 4).trace(axis1=1, axis2=3)


def project_ancilla_sectors(op: np.ndarray) -> np.ndarray:
    """Pinch an operator over the four ancilla z-basis sectors.

    Sums P op P over the projectors P onto each joint ancilla eigenspace.
    Idempotent as a superoperator, and invisible to the ancilla partial
    trace: partial_trace_ancillae(project_ancilla_sectors(X)) equals
    partial_trace_ancillae(X) for every X.
    """
    out = np.zeros((DIM, DIM), dtype=complex)
    for sign2, sign3 in ANCILLA_SECTORS:
        proj = ancilla_projector(sign2, sign3)
        out += proj @ op @ proj
    return out


def bloch_of(rho: np.ndarray) -> BlochVector:
    """Bloch vector (<2Ix>, <2Iy>, <2Iz>) of a 2x2 density matrix."""
    r = np.asarray(rho)
    if r.shape != (2, 2):
        raise ValueError(f"expected a 2x2 density matrix, got shape {r.shape}")
    return BlochVector(
        float(np.trace(r @ PAULI["x"]).real),
        float(np.trace(r @ PAULI["y"]).real),
        float(np.trace(r @ PAULI["z"]).real),
    )


def validate_density_matrix(rho: np.ndarray, atol: float = STATE_TOL) -> np.ndarray:
    """Check Hermiticity, unit trace, and positivity (within -atol).

    Returns the input array on success; raises ValueError otherwise.  The
    negative-eigenvalue allowance absorbs Monte Carlo averaging noise.
    """
    r = np.asarray(rho, dtype=complex)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {r.shape}")
    if not np.allclose(r, r.conj().T, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(r).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix has trace {tr!r}, expected 1")
    lowest = float(np.linalg.eigvalsh(r).min())
    if lowest < -atol:
        raise ValueError(f"density matrix has negative eigenvalue {lowest!r}")
    return r
