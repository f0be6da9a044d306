"""Closed-form broadside approximations behind the high-SNR distance bound.

The chain goes: Fresnel-approximate the element distances, replace the
correlation sum by its Riemann integral (Fresnel integrals C, S), Taylor
it around zero offset, push the resulting Gaussian kernel through the
outer integral analytically.  All of it is derived at broadside
(theta = 0) and only there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special

from .crb import PriorBox
from .model import ArrayConfig, SnrSpec, q_function


@dataclass(frozen=True)
class FresnelPair:
    c_value: float
    s_value: float


def fresnel_integrals(u):
    """Fresnel integrals C(u) = int_0^u cos(pi t^2/2) dt and the sine
    counterpart S(u), for u >= 0."""
    if u < 0:
        raise ValueError("u must be >= 0 (odd-extend at the call site if needed)")
    s, c = scipy.special.fresnel(u)
    return FresnelPair(float(c), float(s))


def lobe_parameter(cfg: ArrayConfig, d, h, large_k=True):
    """Fresnel-lobe argument nu = sqrt(K^2 delta^2 z / (2 lambda)) with
    z = h / (d (d+h)).  large_k=False keeps the exact (K-1)/2 prefactor,
    useful as a diagnostic of the large-K simplification at small K."""
    if not d > 0 or h < 0:
        raise ValueError("need d > 0 and h >= 0")
    z = h / (d * (d + h))
    half_width = cfg.num_antennas / 2.0 if large_k else (cfg.num_antennas - 1) / 2.0
    return half_width * math.sqrt(2.0 * cfg.spacing ** 2 * z / cfg.wavelength)


def rho_fresnel(cfg: ArrayConfig, d, h):
    """Broadside correlation via the Fresnel-integral (continuous-aperture)
    approximation: sqrt((C(nu)^2 + S(nu)^2)) / nu, with rho -> 1 as nu -> 0."""
    nu = lobe_parameter(cfg, d, h)
    if nu < 1e-8:
        return 1.0
    pair = fresnel_integrals(nu)
    return math.sqrt(pair.c_value ** 2 + pair.s_value ** 2) / nu


def rho_taylor(cfg: ArrayConfig, d, h):
    """Small-offset expansion 1 - pi^2 delta^4 K^4 h^2 / (360 lambda^2 d^4)."""
    if not d > 0:
        raise ValueError("need d > 0")
    k = cfg.num_antennas
    return 1.0 - math.pi ** 2 * cfg.spacing ** 4 * k ** 4 * h * h / (
        360.0 * cfg.wavelength ** 2 * d ** 4
    )


def gamma_coefficient(cfg: ArrayConfig, snr: SnrSpec):
    """Kernel slope gamma = sqrt(K SNR pi^2 D_a^4 / (360 lambda^2)), the
    coefficient of h/d^2 inside Q in the small-offset error probability."""
    return math.sqrt(
        cfg.num_antennas * snr.snr_per_antenna * math.pi ** 2 * cfg.aperture ** 4
        / (360.0 * cfg.wavelength ** 2)
    )


def pmin_small_h(cfg: ArrayConfig, snr: SnrSpec, d, h):
    """Small-offset broadside error probability Q(gamma * h / d^2),
    using the aperture simplification delta*K ~= D_a."""
    if not d > 0:
        raise ValueError("need d > 0")
    return q_function(gamma_coefficient(cfg, snr) * h / (d * d))


def highsnr_integral_closed(gamma, prior: PriorBox):
    """Closed form (d_max^5 - d_min^5) / (20 gamma^2 T_d) of the high-SNR
    double integral (1/T_d) Int h Int Q(gamma h / d^2) dd dh.

    With gamma = gamma_coefficient(cfg, snr) this reproduces the
    high-SNR ZZB asymptote exactly.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not prior.angle_degenerate:
        raise ValueError("closed form is for a distance-only prior")
    return (prior.d_max ** 5 - prior.d_min ** 5) / (20.0 * gamma * gamma * prior.span_d)
