"""Cramer-Rao bounds: closed-form local expressions, prior-averaged global
bounds, and a finite-difference Fisher-information oracle used to
cross-validate the closed forms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ArrayConfig, PolarPosition, SnrSpec, steering_vector


class ConvergenceError(RuntimeError):
    """Raised when grid doubling fails to stabilize a quadrature result."""


@dataclass(frozen=True)
class PriorBox:
    """Uniform prior support [d_min, d_max] x [theta_min, theta_max].

    theta_min == theta_max encodes the known-angle (angle-degenerate)
    prior: angle integrals collapse to evaluation at theta_min and the
    density lives on the distance interval alone.
    """

    d_min: float
    d_max: float
    theta_min: float = 0.0
    theta_max: float = 0.0

    def __post_init__(self):
        if not (self.d_min >= 0 and self.d_max > self.d_min):
            raise ValueError(f"need d_max > d_min >= 0, got [{self.d_min}, {self.d_max}]")
        if not (-math.pi / 2 < self.theta_min <= self.theta_max < math.pi / 2):
            raise ValueError(
                f"need -pi/2 < theta_min <= theta_max < pi/2, got [{self.theta_min}, {self.theta_max}]"
            )

    @property
    def span_d(self):
        return self.d_max - self.d_min

    @property
    def span_theta(self):
        return self.theta_max - self.theta_min

    @property
    def angle_degenerate(self):
        return self.span_theta == 0.0

    def density(self):
        """Uniform density on the box; requires a nondegenerate angle span."""
        if self.angle_degenerate:
            raise ValueError("density is undefined for an angle-degenerate prior")
        return 1.0 / (self.span_d * self.span_theta)


def _check_regular(p_theta):
    if abs(abs(p_theta) - math.pi / 2) < 1e-15:
        raise ValueError("CRB is singular at endfire (|theta| = pi/2)")


def crb_distance_local(cfg: ArrayConfig, snr: SnrSpec, p: PolarPosition):
    """Closed-form local CRB for distance estimation, in m^2.

    6 c^2 d^2 (delta^2 (K^2-4) sin^2(t) + 15 d^2)
    --------------------------------------------------------------
    pi^2 fc^2 K SNR cos^4(t) delta^4 (K^2-4) (K^2-1)
    """
    _check_regular(p.theta)
    k = cfg.num_antennas
    c = cfg.speed_of_light
    num = 6.0 * c * c * p.d * p.d * (
        cfg.spacing ** 2 * (k * k - 4) * math.sin(p.theta) ** 2 + 15.0 * p.d * p.d
    )
    den = (
        math.pi ** 2 * cfg.carrier_freq ** 2 * k * snr.snr_per_antenna
        * math.cos(p.theta) ** 4 * cfg.spacing ** 4 * (k * k - 4) * (k * k - 1)
    )
    return num / den


def crb_aoa_local(cfg: ArrayConfig, snr: SnrSpec, p: PolarPosition):
    """Closed-form local CRB for angle estimation, in rad^2 (no d dependence)."""
    _check_regular(p.theta)
    k = cfg.num_antennas
    c = cfg.speed_of_light
    return 3.0 * c * c / (
        2.0 * math.pi ** 2 * cfg.carrier_freq ** 2 * k * snr.snr_per_antenna
        * math.cos(p.theta) ** 2 * cfg.spacing ** 2 * (k * k - 1)
    )


def _local_crb_grid(cfg, snr, d, theta, parameter):
    # vectorized closed forms, tolerating d == 0 (distance CRB -> 0 there)
    k = cfg.num_antennas
    c = cfg.speed_of_light
    common = math.pi ** 2 * cfg.carrier_freq ** 2 * k * snr.snr_per_antenna
    if parameter == "distance":
        num = 6.0 * c * c * d * d * (cfg.spacing ** 2 * (k * k - 4) * np.sin(theta) ** 2 + 15.0 * d * d)
        den = common * np.cos(theta) ** 4 * cfg.spacing ** 4 * (k * k - 4) * (k * k - 1)
        return num / den
    if parameter == "aoa":
        den = 2.0 * common * np.cos(theta) ** 2 * cfg.spacing ** 2 * (k * k - 1)
        return 3.0 * c * c / den * np.ones_like(np.broadcast_to(d, np.broadcast(d, theta).shape))
    raise ValueError(f"unknown parameter {parameter!r}")


def crb_global(cfg, snr, prior: PriorBox, parameter="distance", quad=None,
               convergence_target=1e-3, max_doublings=8):
    """Local CRB averaged over the uniform prior box (trapezoid quadrature).

    Grid counts come from `quad` (any object with n_d / n_theta attributes,
    e.g. a zzb.QuadratureSpec) or fall back to 129 x 65.  The grid is
    doubled until the average changes by less than `convergence_target`
    relative; failure to stabilize raises ConvergenceError.
    """
    n_d = getattr(quad, "n_d", 129)
    n_theta = getattr(quad, "n_theta", 65)

    def average(nd, nt):
        d = np.linspace(prior.d_min, prior.d_max, nd)
        if prior.angle_degenerate:
            vals = _local_crb_grid(cfg, snr, d, prior.theta_min, parameter)
            return float(np.trapezoid(vals, d) / prior.span_d)
        th = np.linspace(prior.theta_min, prior.theta_max, nt)
        vals = _local_crb_grid(cfg, snr, d[:, None], th[None, :], parameter)
        inner = np.trapezoid(vals, th, axis=1)
        return float(np.trapezoid(inner, d) / (prior.span_d * prior.span_theta))

    prev = average(n_d, n_theta)
    for _ in range(max_doublings):
        n_d, n_theta = 2 * n_d, 2 * n_theta
        cur = average(n_d, n_theta)
        if abs(cur - prev) <= convergence_target * abs(cur):
            return cur
        prev = cur
    raise ConvergenceError(
        f"global CRB quadrature did not stabilize to {convergence_target:.1e} after {max_doublings} doublings"
    )


def crb_global_distance_closed(cfg: ArrayConfig, snr: SnrSpec, d_max: float):
    """Large-K closed form of the prior-averaged distance CRB for a
    [0, d_max] prior at broadside: 18 c^2 d_max^4 / (pi^2 fc^2 K SNR D_a^4).

    Uses the aperture substitution delta^4 (K^2-4)(K^2-1) ~= D_a^4, which
    is ~20% off at K=21; prefer crb_global for reference values.
    """
    if not d_max > 0:
        raise ValueError(f"d_max must be positive, got {d_max!r}")
    c = cfg.speed_of_light
    return 18.0 * c * c * d_max ** 4 / (
        math.pi ** 2 * cfg.carrier_freq ** 2 * cfg.num_antennas
        * snr.snr_per_antenna * cfg.aperture ** 4
    )


@dataclass(frozen=True)
class FisherMatrix:
    """2x2 Fisher information over (d, theta) with a guarded inverse."""

    matrix: np.ndarray

    def inverse(self):
        m = self.matrix
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        scale = abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0])
        if not np.isfinite(det) or abs(det) <= 1e-12 * scale:
            raise np.linalg.LinAlgError("Fisher matrix is numerically singular")
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) / det


def numerical_fim(cfg: ArrayConfig, snr: SnrSpec, p: PolarPosition, step=1e-6):
    """Finite-difference Fisher information for the spherical-wavefront
    AWGN model, treating the complex amplitude as an unknown nuisance.

    Central differences of the exact steering vector give the Jacobian D;
    the information on (d, theta) after projecting out the component of D
    along s (amplitude/phase nuisance) is

        J = 2 * SNR * Re{ D^H (I - s s^H / K) D }.

    This is the oracle the closed-form local CRBs must agree with.
    `step` is relative and must lie in [1e-7, 1e-3].
    """
    if not 1e-7 <= step <= 1e-3:
        raise ValueError(f"relative step must lie in [1e-7, 1e-3], got {step!r}")
    hd = step * p.d
    ht = step
    dd = (steering_vector(cfg, PolarPosition(p.d + hd, p.theta))
          - steering_vector(cfg, PolarPosition(p.d - hd, p.theta))) / (2.0 * hd)
    dt = (steering_vector(cfg, PolarPosition(p.d, p.theta + ht))
          - steering_vector(cfg, PolarPosition(p.d, p.theta - ht))) / (2.0 * ht)
    s = steering_vector(cfg, p)
    jac = np.stack([dd, dt], axis=1)
    jac = jac - np.outer(s, s.conj() @ jac) / cfg.num_antennas
    j = 2.0 * snr.snr_per_antenna * np.real(jac.conj().T @ jac)
    return FisherMatrix(0.5 * (j + j.T))
