"""Gradient-diffusion dephasing mapped onto covariance matrices.

A gradient pulse winds transverse magnetization into a spiral of wavenumber
k0; molecular diffusion with coefficient D then blurs it by a Gaussian of
variance D*t, so the echo recovered by the inverse gradient is attenuated by
exp(-n^2 k0^2 D t / 2) for a coherence of order n.  Because diffusion shifts
the phase of every spin in a molecule equally, one gradient-diffusion
interval realizes the totally correlated error model; winding each spin
during its own interval realizes the uncorrelated one.

The interface takes k0 directly: the physics enters only through k0^2 D.
(For a rectangular gradient pulse of strength g and duration delta on a
nucleus of gyromagnetic ratio gamma, k0 = gamma * g * delta.)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCHEMES = ("totally-correlated", "uncorrelated")


@dataclass(frozen=True)
class GradientDiffusionSpec:
    """One gradient-diffusion decoherence setting.

    gradient_wavenumber in rad/m, diffusion_coefficient in m^2/s, and the
    diffusion_time in seconds; ``scheme`` picks which error model the pulse
    arrangement realizes.
    """

    gradient_wavenumber: float
    diffusion_coefficient: float
    diffusion_time: float
    scheme: str = "totally-correlated"

    def __post_init__(self):
        if self.diffusion_coefficient < 0:
            raise ValueError(f"diffusion coefficient must be >= 0, got {self.diffusion_coefficient!r}")
        if self.diffusion_time < 0:
            raise ValueError(f"diffusion time must be >= 0, got {self.diffusion_time!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def rate(self) -> float:
        """The dephasing rate k0^2 D shared by all coherence formulas."""
        return self.gradient_wavenumber**2 * self.diffusion_coefficient


def attenuation_factor(spec: GradientDiffusionSpec, order: int) -> float:
    """Echo attenuation exp(-n^2 k0^2 D t / 2) of an order-n coherence.

    Equals 1 for order 0 and decays with the square of the coherence order.
    """
    order = int(order)
    return float(np.exp(-0.5 * order**2 * spec.rate * spec.diffusion_time))


def spec_to_covariance(spec: GradientDiffusionSpec) -> np.ndarray:
    """Effective phase covariance of the gradient-diffusion experiment.

    Totally correlated scheme: every entry k0^2 D (one shared random phase).
    Uncorrelated scheme: diag(k0^2 D), i.e. 2/tau with 1/tau = k0^2 D / 2.
    Feeding the result to the analytic dephasing channel reproduces
    :func:`attenuation_factor` for every coherence order.
    """
    if spec.scheme == "totally-correlated":
        return np.full((3, 3), spec.rate)
    return np.diag(np.full(3, spec.rate))
