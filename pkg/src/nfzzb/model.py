"""Array geometry, near-field steering vectors and the binary-detection kernel.

Everything downstream (CRBs, Ziv-Zakai integrals, the Monte Carlo
simulator) is built on the spherical-wavefront model implemented here:
a uniform linear array of K elements observes a narrowband tone from a
source at polar position (d, theta), and the per-element phase is set by
the exact element-to-source distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array: K elements spaced `spacing` apart, centered at 0.

    K must be odd and >= 3 so the central element is the phase reference
    and the closed-form CRBs stay finite.
    """

    num_antennas: int
    spacing: float
    carrier_freq: float
    speed_of_light: float = SPEED_OF_LIGHT

    def __post_init__(self):
        k = self.num_antennas
        if not isinstance(k, (int, np.integer)) or k < 3 or k % 2 == 0:
            raise ValueError(f"num_antennas must be an odd integer >= 3, got {k!r}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing!r}")
        if not self.carrier_freq > 0:
            raise ValueError(f"carrier_freq must be positive, got {self.carrier_freq!r}")

    @classmethod
    def from_aperture(cls, num_antennas, aperture, carrier_freq):
        """Build from a fixed physical aperture D_a = (K-1)*spacing."""
        if not aperture > 0:
            raise ValueError(f"aperture must be positive, got {aperture!r}")
        return cls(num_antennas, aperture / (num_antennas - 1), carrier_freq)

    @property
    def wavelength(self):
        return self.speed_of_light / self.carrier_freq

    @property
    def aperture(self):
        return (self.num_antennas - 1) * self.spacing

    def element_positions(self):
        m = (self.num_antennas - 1) // 2
        return np.arange(-m, m + 1) * self.spacing


@dataclass(frozen=True)
class PolarPosition:
    """Source position: distance d > 0, angle theta in (-pi/2, pi/2) radians."""

    d: float
    theta: float

    def __post_init__(self):
        if not self.d > 0 or not math.isfinite(self.d):
            raise ValueError(f"distance must be positive and finite, got {self.d!r}")
        if not abs(self.theta) < math.pi / 2:
            raise ValueError(f"theta must lie strictly inside (-pi/2, pi/2), got {self.theta!r}")

    def displaced(self, delta):
        return PolarPosition(self.d + delta.delta_d, self.theta + delta.delta_theta)


@dataclass(frozen=True)
class Displacement:
    """Signed distance/angle offset applied to a PolarPosition."""

    delta_d: float
    delta_theta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.delta_d) and math.isfinite(self.delta_theta)):
            raise ValueError("displacement components must be finite")

    def __neg__(self):
        return Displacement(-self.delta_d, -self.delta_theta)


@dataclass(frozen=True)
class SnrSpec:
    """Per-antenna SNR alpha^2/sigma^2 as a linear power ratio.

    Zero is allowed: it models the no-information limit (P_min = 1/2
    everywhere, pure-noise Monte Carlo runs).
    """

    snr_per_antenna: float

    def __post_init__(self):
        if not self.snr_per_antenna >= 0 or not math.isfinite(self.snr_per_antenna):
            raise ValueError(f"snr_per_antenna must be finite and >= 0, got {self.snr_per_antenna!r}")

    @classmethod
    def from_db(cls, snr_db):
        return cls(10.0 ** (snr_db / 10.0))

    @property
    def db(self):
        return 10.0 * math.log10(self.snr_per_antenna)

    def total(self, cfg: ArrayConfig):
        """SNR summed over the whole array, K * per-antenna SNR."""
        return cfg.num_antennas * self.snr_per_antenna


def element_positions(cfg: ArrayConfig):
    """Element abscissas x_k = k*spacing, k = -(K-1)/2 ... (K-1)/2, ascending."""
    return cfg.element_positions()


def _check_element_index(cfg, k):
    m = (cfg.num_antennas - 1) // 2
    if abs(k) > m:
        raise ValueError(f"element index {k} outside [-{m}, {m}]")


def exact_distance(cfg: ArrayConfig, k: int, p: PolarPosition):
    """Exact distance from the source to element k (law of cosines).

    Evaluated as sqrt(d^2 + x_k^2 - 2 x_k d sin(theta)), which is the
    numerically stable form of d*sqrt(1 + x_k^2/d^2 - 2 x_k sin(theta)/d).
    """
    _check_element_index(cfg, k)
    x = k * cfg.spacing
    return math.sqrt(p.d * p.d + x * x - 2.0 * x * p.d * math.sin(p.theta))


def fresnel_distance(cfg: ArrayConfig, k: int, d: float):
    """Second-order (Fresnel) broadside approximation d + x_k^2/(2d)."""
    _check_element_index(cfg, k)
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d!r}")
    x = k * cfg.spacing
    return d + x * x / (2.0 * d)


def steering_vector(cfg: ArrayConfig, p: PolarPosition):
    """Near-field steering vector, entry k = exp(-j*2*pi/lambda * d_k(d, theta))."""
    x = cfg.element_positions()
    dk = np.sqrt(p.d * p.d + x * x - 2.0 * x * p.d * math.sin(p.theta))
    return np.exp(-2j * np.pi / cfg.wavelength * dk)


def correlation_map(cfg: ArrayConfig, d0, theta0, d1, theta1):
    """Normalized correlation |s(d1,theta1)^H s(d0,theta0)| / K, vectorized.

    Inputs broadcast like numpy arrays; distances may be 0 (the stable
    sqrt form degrades gracefully to d_k = |x_k|).  The sum is taken over
    phase differences per element, so the common carrier phase cancels
    instead of being subtracted after a large cancellation.
    """
    two_pi = 2.0 * np.pi / cfg.wavelength
    s0 = np.sin(theta0)
    s1 = np.sin(theta1)
    acc = 0.0
    for x in cfg.element_positions():
        r0 = np.sqrt(d0 * d0 + x * x - 2.0 * x * d0 * s0)
        r1 = np.sqrt(d1 * d1 + x * x - 2.0 * x * d1 * s1)
        acc = acc + np.exp(1j * two_pi * (r1 - r0))
    return np.abs(acc) / cfg.num_antennas


def correlation(cfg: ArrayConfig, p: PolarPosition, delta: Displacement):
    """Normalized waveform correlation between positions p and p + delta.

    Symmetric under swapping the endpoints and invariant to any global
    phase; 1 exactly when delta is zero.
    """
    q = p.displaced(delta)  # validates p + delta
    return float(correlation_map(cfg, p.d, p.theta, q.d, q.theta))


def q_function(x):
    """Gaussian tail probability Q(x) = 0.5 * erfc(x / sqrt(2))."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0)) if np.ndim(x) else 0.5 * math.erfc(x / math.sqrt(2.0))


def pmin(cfg: ArrayConfig, snr: SnrSpec, p: PolarPosition, delta: Displacement):
    """Minimum error probability of the optimal binary detector between
    the waveforms at p and p + delta: Q(sqrt(K*SNR*(1 - rho)))."""
    rho = correlation(cfg, p, delta)
    return q_function(math.sqrt(max(snr.total(cfg) * (1.0 - rho), 0.0)))
