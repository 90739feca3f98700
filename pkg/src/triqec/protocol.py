"""The full error-correction pipeline and its mixed-ancilla analysis.

A run is prepare -> encode -> dephase -> decode -> correct -> discard
ancillae.  The encoder doubles as the decoder (it is self-inverse), the
correction step is the doubly-controlled flip, and discarding the ancillae
is the partial trace.  With ground-state ancillae the protected (y, z)
components of the data spin come back scaled by the closed-form survival
factor; the x component is untouched by construction.

The pipeline exists in two independent flavors: ``run_pipeline`` evolves the
state through the exact Gaussian-averaged channel, while ``run_pipeline_mc``
propagates every sampled trajectory through the actual gate sequence and
averages at the end.  Their agreement is the central cross-check of the
package.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytics import _triple_quantum_product
from .gates import encoder, global_rotation, toffoli
from .noise import (
    BLOCK,
    NoiseChannel,
    _propagator_batch,
    apply_channel_analytic,
    phase_stream,
    validate_covariance,
)
from .operators import (
    ANCILLA_SECTORS,
    PAULI,
    BlochVector,
    bloch_of,
    data_state_from_bloch,
    partial_trace_ancillae,
    pure_data_state,
)

BASIS_ROTATIONS = ("none", "y-pi/2")


class ConfigError(ValueError):
    """Pipeline configuration that violates its invariants."""


@dataclass(frozen=True)
class AncillaMixture:
    """Statistical weights of the four diagonal ancilla states.

    Ordered (+,+), (+,-), (-,+), (-,-); nonnegative and summing to one.
    """

    mu_pp: float
    mu_pm: float
    mu_mp: float
    mu_mm: float

    def __post_init__(self):
        w = self.weights
        if min(w) < -1e-12:
            raise ConfigError(f"mixture weights must be nonnegative, got {w}")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ConfigError(f"mixture weights must sum to 1, got {sum(w)!r}")

    @property
    def weights(self) -> tuple[float, float, float, float]:
        return (self.mu_pp, self.mu_pm, self.mu_mp, self.mu_mm)


GROUND_ANCILLAE = AncillaMixture(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class CorrelatedComponent:
    """One term of an ancilla-diagonal state classically correlated with the data.

    ``bloch`` is the data-spin Bloch vector of this component and ``sector``
    the (sign2, sign3) ancilla z-basis sector it multiplies.
    """

    weight: float
    bloch: tuple[float, float, float]
    sector: tuple[int, int]

    def __post_init__(self):
        if self.weight < -1e-12:
            raise ConfigError(f"component weight must be nonnegative, got {self.weight!r}")
        if self.sector not in ANCILLA_SECTORS:
            raise ConfigError(f"sector must be a pair of +-1, got {self.sector!r}")


@dataclass(frozen=True, eq=False)
class PipelineConfig:
    """What to run: initial state, ancilla preparation, channel, options.

    The data state is given either as amplitudes (alpha, beta), as a Bloch
    vector, or per component of a correlated ancilla mixture.  The optional
    y-pi/2 basis rotation (applied after encoding, undone before decoding)
    re-targets the code at z-axis noise.
    """

    channel: NoiseChannel
    alpha: complex | None = None
    beta: complex | None = None
    bloch: tuple[float, float, float] | None = None
    ancillae: AncillaMixture | tuple[CorrelatedComponent, ...] | None = None
    correction: bool = True
    basis_rotation: str = "none"

    def __post_init__(self):
        if self.basis_rotation not in BASIS_ROTATIONS:
            raise ConfigError(
                f"basis_rotation must be one of {BASIS_ROTATIONS}, got {self.basis_rotation!r}"
            )
        has_amplitudes = self.alpha is not None or self.beta is not None
        if has_amplitudes and (self.alpha is None or self.beta is None):
            raise ConfigError("give both alpha and beta or neither")
        correlated = self.ancillae is not None and not isinstance(self.ancillae, AncillaMixture)
        if correlated:
            components = tuple(self.ancillae)
            if not components:
                raise ConfigError("correlated mixture needs at least one component")
            total = sum(c.weight for c in components)
            if abs(total - 1.0) > 1e-12:
                raise ConfigError(f"correlated mixture weights must sum to 1, got {total!r}")
            if has_amplitudes or self.bloch is not None:
                raise ConfigError(
                    "a correlated mixture carries its own data states; "
                    "do not also give alpha/beta or a Bloch vector"
                )
            object.__setattr__(self, "ancillae", components)
        elif has_amplitudes and self.bloch is not None:
            raise ConfigError("give either amplitudes or a Bloch vector, not both")
        elif not has_amplitudes and self.bloch is None:
            raise ConfigError("no initial data state given")


@dataclass(frozen=True, eq=False)
class PipelineResult:
    """Reduced output state, the Bloch vectors, and the measured survival.

    ``survival`` is the least-squares scalar mapping the protected input
    components (y, z) onto the output ones, or None when the input has no
    protected component.  Monte Carlo runs also report its standard error.
    """

    reduced: np.ndarray
    bloch_in: BlochVector
    bloch_out: BlochVector
    survival: float | None
    survival_stderr: float | None = None


def _ancilla_matrix(mix: AncillaMixture) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for weight, (s2, s3) in zip(mix.weights, ANCILLA_SECTORS):
        half2 = (np.eye(2) + s2 * PAULI["z"]) / 2
        half3 = (np.eye(2) + s3 * PAULI["z"]) / 2
        out += weight * np.kron(half2, half3)
    return out


def initial_state(config: PipelineConfig) -> np.ndarray:
    """The 8x8 state the pipeline starts from."""
    ancillae = config.ancillae
    if ancillae is not None and not isinstance(ancillae, AncillaMixture):
        out = np.zeros((8, 8), dtype=complex)
        for comp in ancillae:
            s2, s3 = comp.sector
            sector = np.kron(
                (np.eye(2) + s2 * PAULI["z"]) / 2, (np.eye(2) + s3 * PAULI["z"]) / 2
            )
            out += comp.weight * np.kron(data_state_from_bloch(comp.bloch), sector)
        return out
    if config.alpha is not None:
        # pure_data_state validates the normalization; keep its data factor.
        data = partial_trace_ancillae(pure_data_state(config.alpha, config.beta))
    else:
        data = data_state_from_bloch(config.bloch)
    mix = ancillae if isinstance(ancillae, AncillaMixture) else GROUND_ANCILLAE
    return np.kron(data, _ancilla_matrix(mix))


def _conjugators(correction: bool, basis_rotation: str) -> tuple[np.ndarray, np.ndarray]:
    # Constant unitaries applied before and after the noise:
    # pre = (rotation) encode, post = correct decode (rotation inverse).
    if not correction:
        eye = np.eye(8, dtype=complex)
        return eye, eye
    enc = encoder()
    if basis_rotation == "y-pi/2":
        rot = global_rotation("y", np.pi / 2)
        return rot @ enc, toffoli() @ enc @ rot.conj().T
    return enc, toffoli() @ enc


def evolve_corrected(
    rho: np.ndarray, cov, t: float, axis: str = "x", basis_rotation: str = "none"
) -> np.ndarray:
    """Encode, dephase through the exact channel, decode, and correct."""
    pre, post = _conjugators(True, basis_rotation)
    noisy = apply_channel_analytic(pre @ rho @ pre.conj().T, cov, t, axis)
    return post @ noisy @ post.conj().T


def evolve_uncorrected(rho: np.ndarray, cov, t: float, axis: str = "x") -> np.ndarray:
    """Dephase through the exact channel with no coding at all."""
    return apply_channel_analytic(rho, cov, t, axis)


def _survival_ratio(bloch_in: BlochVector, bloch_out: BlochVector) -> float | None:
    # Least-squares scalar on the protected (y, z) plane; undefined when the
    # input carries no protected component.
    weight = bloch_in.y**2 + bloch_in.z**2
    if weight == 0:
        return None
    return (bloch_out.y * bloch_in.y + bloch_out.z * bloch_in.z) / weight


def run_pipeline(config: PipelineConfig, t: float) -> PipelineResult:
    """Run the pipeline at decoherence time t.

    Analytic channels evolve through the exact Gaussian average; Monte Carlo
    channels delegate to :func:`run_pipeline_mc` with the channel's sample
    count and seed.
    """
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    if config.channel.kind == "monte-carlo":
        return run_pipeline_mc(
            config,
            t,
            config.channel.samples,
            config.channel.seed,
            workers=config.channel.workers,
        )
    rho0 = initial_state(config)
    bloch_in = bloch_of(partial_trace_ancillae(rho0))
    if config.correction:
        out = evolve_corrected(
            rho0, config.channel.covariance, t, config.channel.axis, config.basis_rotation
        )
    else:
        out = evolve_uncorrected(rho0, config.channel.covariance, t, config.channel.axis)
    reduced = partial_trace_ancillae(out)
    bloch_out = bloch_of(reduced)
    return PipelineResult(
        reduced=reduced,
        bloch_in=bloch_in,
        bloch_out=bloch_out,
        survival=_survival_ratio(bloch_in, bloch_out),
    )


def run_pipeline_mc(
    config: PipelineConfig, t: float, samples: int, seed: int, workers: int = 1
) -> PipelineResult:
    """Monte Carlo pipeline: every sampled trajectory runs the full circuit.

    Each sample draws a phase vector, builds the exact random propagator, and
    conjugates the encoded state through noise, decoding, and correction; the
    trajectory average and the per-sample spread of the survival ratio give
    the estimate and its standard error.  Results are bit-identical for a
    fixed seed regardless of ``workers``.
    """
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t!r}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples!r}")
    rho0 = initial_state(config)
    bloch_in = bloch_of(partial_trace_ancillae(rho0))
    pre, post = _conjugators(config.correction, config.basis_rotation)
    rho_encoded = pre @ rho0 @ pre.conj().T

    # Data-spin observables pulled back through the post-noise gates, so each
    # trajectory needs only one conjugation by its random propagator.
    pauli_obs = {}
    for axis in ("x", "y", "z"):
        full = np.kron(PAULI[axis], np.eye(4, dtype=complex))
        pauli_obs[axis] = post.conj().T @ full @ post

    chis = phase_stream(config.channel.covariance, t, seed, samples)

    def block_stats(block: np.ndarray):
        units = _propagator_batch(block, config.channel.axis)
        noisy = np.einsum("nij,jk,nlk->nil", units, rho_encoded, units.conj())
        state_sum = noisy.sum(axis=0)
        comps = {
            axis: np.einsum("nij,ji->n", noisy, obs).real
            for axis, obs in pauli_obs.items()
        }
        return state_sum, comps

    blocks = [chis[start : start + BLOCK] for start in range(0, len(chis), BLOCK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(block_stats, blocks))
    else:
        results = [block_stats(block) for block in blocks]

    state_sum = np.zeros((8, 8), dtype=complex)
    for part, _ in results:
        state_sum += part
    mean_encoded = state_sum / samples
    reduced = partial_trace_ancillae(post @ mean_encoded @ post.conj().T)
    bloch_out = bloch_of(reduced)

    survival = None
    stderr = None
    weight = bloch_in.y**2 + bloch_in.z**2
    if weight > 0:
        ys = np.concatenate([comps["y"] for _, comps in results])
        zs = np.concatenate([comps["z"] for _, comps in results])
        per_sample = (ys * bloch_in.y + zs * bloch_in.z) / weight
        survival = float(per_sample.mean())
        if samples > 1:
            stderr = float(per_sample.std(ddof=1) / np.sqrt(samples))
        else:
            stderr = 0.0
    return PipelineResult(
        reduced=reduced,
        bloch_in=bloch_in,
        bloch_out=bloch_out,
        survival=survival,
        survival_stderr=stderr,
    )


def sector_survival(cov, t, sign2: int = +1, sign3: int = +1):
    """Survival factor when the ancillae start in one diagonal sector.

    Flipping an ancilla flips the sign of the matching single-spin term (and
    their product flips the three-spin term) in the closed form; the ground
    sector (+, +) reduces to :func:`analytics.survival_factor`.
    """
    c = validate_covariance(cov)
    t = np.asarray(t, dtype=float)
    f1, f2, f3 = (np.exp(-0.5 * t * c[j, j]) for j in range(3))
    triple = _triple_quantum_product(c, t)
    out = 0.5 * (f1 + sign2 * f2 + sign3 * f3 - sign2 * sign3 * triple)
    return float(out) if out.ndim == 0 else out


def mixed_ancilla_survival(mix: AncillaMixture, cov, t):
    """Survival of the protected components for a diagonal ancilla mixture.

    The weighted combination of the four sector survivals; equals the
    pure-ancilla survival factor for the mixture (1, 0, 0, 0).
    """
    parts = [
        weight * sector_survival(cov, t, s2, s3)
        for weight, (s2, s3) in zip(mix.weights, ANCILLA_SECTORS)
        if weight != 0.0
    ]
    return sum(parts)


def sector_slope_at_zero(cov, sign2: int, sign3: int) -> float:
    """Initial time derivative of one sector's survival factor."""
    c = validate_covariance(cov)
    c11, c22, c33 = c[0, 0], c[1, 1], c[2, 2]
    return -0.25 * (c11 + sign2 * c22 + sign3 * c33 - sign2 * sign3 * (c11 + c22 + c33))


def mixed_ancilla_slope_at_zero(mix: AncillaMixture, cov) -> float:
    """Initial decay slope of a diagonal ancilla mixture.

    Zero for the ground mixture regardless of the covariance; any weight on
    the other sectors couples the slope to the variances.
    """
    c = validate_covariance(cov)
    mpp, mpm, mmp, mmm = mix.weights
    c11, c22, c33 = c[0, 0], c[1, 1], c[2, 2]
    return 0.25 * (
        (mpp - 1) * c11
        - mpm * (c11 + 2 * c22)
        - mmp * (c11 + 2 * c33)
        + mmm * (c11 + 2 * c22 + 2 * c33)
    )


@dataclass(frozen=True)
class NoGoCertificate:
    """Outcome of the simplex search for first-order-protected mixtures.

    ``zeros`` lists the grid mixtures whose initial slope vanishes for every
    covariance compatible with the model's variance signs; ``margins`` refer
    to the remaining grid points (min certifies uniqueness, max is the most
    fragile mixture).
    """

    grid_step: float
    zeros: tuple[tuple[float, float, float, float], ...]
    unique_ground_zero: bool
    min_margin: float
    argmin: tuple[float, float, float, float]
    max_margin: float
    argmax: tuple[float, float, float, float]


def ancilla_mixture_nogo_search(cov, grid_step: float = 0.01) -> NoGoCertificate:
    """Search the mixture simplex for zeros of the initial decay slope.

    The slope is linear in the three variances with coefficients fixed by the
    mixture, so it vanishes for *every* admissible covariance exactly when
    those coefficients all vanish; a zero that relies on cancellation between
    particular variance values offers no protection for unknown noise.  The
    margin reported for each grid mixture is therefore the cancellation-free
    magnitude (c11 (mu_pm + mu_mp) + c22 |mu_pm - mu_mm| + c33 |mu_mp -
    mu_mm|)/2 >= |slope|, evaluated with the model's variances.  With all
    variances positive the ground vertex (1, 0, 0, 0) is the unique zero.

    Raises
    ------
    ValueError
        If c11 is not strictly positive (the uniqueness statement is
        conditional on a dephasing data spin).
    """
    c = validate_covariance(cov)
    c11, c22, c33 = c[0, 0], c[1, 1], c[2, 2]
    if c11 <= 0:
        raise ValueError("the no-go search requires a positive data-spin variance c11")
    if grid_step <= 0 or grid_step > 1:
        raise ValueError(f"grid_step must be in (0, 1], got {grid_step!r}")
    n = max(1, round(1.0 / grid_step))

    counts = np.indices((n + 1, n + 1, n + 1)).reshape(3, -1).T
    counts = counts[counts.sum(axis=1) <= n]
    mpm, mmp, mmm = (counts[:, j] / n for j in range(3))
    mpp = 1.0 - mpm - mmp - mmm
    margins = 0.5 * (c11 * (mpm + mmp) + c22 * np.abs(mpm - mmm) + c33 * np.abs(mmp - mmm))

    def mixture(i: int) -> tuple[float, float, float, float]:
        return (float(mpp[i]), float(mpm[i]), float(mmp[i]), float(mmm[i]))

    tol = 1e-12 * max(c11, c22, c33)
    zero_idx = np.flatnonzero(margins <= tol)
    nonzero_idx = np.flatnonzero(margins > tol)
    zeros = tuple(sorted(mixture(i) for i in zero_idx))
    imin = nonzero_idx[np.argmin(margins[nonzero_idx])]
    imax = nonzero_idx[np.argmax(margins[nonzero_idx])]
    return NoGoCertificate(
        grid_step=1.0 / n,
        zeros=zeros,
        unique_ground_zero=zeros == ((1.0, 0.0, 0.0, 0.0),),
        min_margin=float(margins[imin]),
        argmin=mixture(imin),
        max_margin=float(margins[imax]),
        argmax=mixture(imax),
    )


def correlated_mixture_residuals(components, cov) -> tuple[float, float]:
    """First-order protection conditions for a correlated diagonal mixture.

    Returns the pair (y residual, z residual): the initial time derivatives
    of the protected output components, each a weighted sum of the sector
    slopes against the per-sector y and z content of the data states.  Both
    vanish exactly when the mixture is protected to first order.
    """
    c = validate_covariance(cov)
    components = tuple(components)
    if not components:
        raise ConfigError("correlated mixture needs at least one component")
    total = sum(comp.weight for comp in components)
    if abs(total - 1.0) > 1e-12:
        raise ConfigError(f"correlated mixture weights must sum to 1, got {total!r}")
    residual_y = 0.0
    residual_z = 0.0
    for comp in components:
        slope = sector_slope_at_zero(c, *comp.sector)
        _, y, z = comp.bloch
        residual_y += comp.weight * y * slope
        residual_z += comp.weight * z * slope
    return residual_y, residual_z
