"""Ziv-Zakai bound quadrature engines.

Three bounds are computed by nested composite-trapezoid quadrature of the
detection-error kernel P_min = Q(sqrt(K*SNR*(1-rho))):

* distance with the angle known (scalar prior),
* distance under joint (d, theta) uncertainty, with an inner worst-case
  search over the angle displacement,
* angle under joint uncertainty (the mirror image of the previous one).

The correlation tables 1-rho depend on geometry only, not on SNR, so each
engine caches them per refinement level and reuses them across an SNR
sweep; refinement doubles every grid count until the bound changes by
less than the requested relative tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .crb import PriorBox
from .model import ArrayConfig, SnrSpec, correlation_map, q_function

# levels whose cached 1-rho tables would exceed this many floats are
# recomputed on the fly instead of being stored
DEFAULT_CACHE_BUDGET = 200_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    """Grid resolutions for the nested ZZB integrals.

    n_h: outer offset grid; n_d / n_theta: prior grids; n_dtheta: candidate
    displacements for the inner worst-case search (odd, so 0 is always a
    candidate).  Refinement doubles every count (n_dtheta -> 2n-1 to stay
    odd) up to max_doublings times, accepting once the bound moves by less
    than convergence_target relative.
    """

    n_h: int = 256
    n_d: int = 128
    n_theta: int = 64
    n_dtheta: int = 65
    convergence_target: float = 0.01
    max_doublings: int = 3

    def __post_init__(self):
        for name in ("n_h", "n_d", "n_theta", "n_dtheta"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2")
        if self.n_dtheta % 2 == 0:
            raise ValueError("n_dtheta must be odd so that zero displacement is a candidate")
        if not 0 < self.convergence_target < 1:
            raise ValueError("convergence_target must be in (0, 1)")
        if self.max_doublings < 0:
            raise ValueError("max_doublings must be >= 0")

    def refined(self):
        return replace(
            self,
            n_h=2 * self.n_h,
            n_d=2 * self.n_d,
            n_theta=2 * self.n_theta,
            n_dtheta=2 * self.n_dtheta - 1,
        )


@dataclass(frozen=True)
class ZzbResult:
    """A single ZZB evaluation: value (m^2 or rad^2), convergence flag and
    the finest grid that produced it."""

    value: float
    parameter: str
    converged: bool
    grid: QuadratureSpec
    approximated: bool = False


def zzb_prior_limit(prior: PriorBox, parameter="distance"):
    """Low-SNR saturation level: the uniform-prior variance T^2 / 12."""
    if parameter == "distance":
        return prior.span_d ** 2 / 12.0
    if parameter == "aoa":
        return prior.span_theta ** 2 / 12.0
    raise ValueError(f"unknown parameter {parameter!r}")


def zzb_highsnr_asymptote(cfg: ArrayConfig, snr: SnrSpec, prior: PriorBox):
    """Closed-form high-SNR limit of the known-angle distance ZZB at
    broadside: 18 lambda^2 (d_max^5 - d_min^5) / (pi^2 K SNR D_a^4 T_d)."""
    if not prior.angle_degenerate or prior.theta_min != 0.0:
        raise ValueError("asymptote is derived for a broadside, angle-degenerate prior")
    lam = cfg.wavelength
    return 18.0 * lam * lam * (prior.d_max ** 5 - prior.d_min ** 5) / (
        math.pi ** 2 * cfg.num_antennas * snr.snr_per_antenna
        * cfg.aperture ** 4 * prior.span_d
    )


def _pmin_from_om(total_snr, one_minus_rho):
    return q_function(np.sqrt(total_snr * np.clip(one_minus_rho, 0.0, None).astype(np.float64)))


class _ConvergingEngine:
    """Shared refine-until-stable loop; subclasses supply _value(level, snr)."""

    def __init__(self, quad, parameter):
        self.quad = quad
        self.parameter = parameter

    def evaluate(self, snr: SnrSpec) -> ZzbResult:
        spec = self.quad
        prev = self._value(0, snr)
        converged = False
        level = 0
        for level in range(1, self.quad.max_doublings + 1):
            spec = spec.refined()
            cur = self._value(level, snr)
            if abs(cur - prev) <= self.quad.convergence_target * max(abs(cur), 1e-300):
                converged = True
                prev = cur
                break
            prev = cur
        else:
            # max_doublings == 0 means "accept the base grid as is"
            converged = self.quad.max_doublings == 0
        return ZzbResult(float(prev), self.parameter, converged, spec)


class DistanceKnownAoaZzbEngine(_ConvergingEngine):
    """Known-angle distance ZZB (scalar prior over [d_min, d_max]):

        (1/T_d) Int_0^T_d h { Int_dmin^{dmax-h} P_min(d, d+h) dd } dh

    with the angle pinned at prior.theta_min.  Correlation tables are
    cached per refinement level and shared across SNR points.
    """

    def __init__(self, cfg, prior, quad=QuadratureSpec()):
        if not prior.angle_degenerate:
            raise ValueError("known-angle engine needs an angle-degenerate prior")
        super().__init__(quad, "distance")
        self.cfg = cfg
        self.prior = prior
        self._tables = {}

    def _table(self, level):
        if level not in self._tables:
            spec = self.quad
            for _ in range(level):
                spec = spec.refined()
            prior = self.prior
            h = np.linspace(0.0, prior.span_d, spec.n_h)
            frac = np.linspace(0.0, 1.0, spec.n_d)
            # row i: n_d points spanning [d_min, d_max - h_i]
            d = prior.d_min + np.outer(prior.span_d - h, frac)
            om = 1.0 - correlation_map(
                self.cfg, d, prior.theta_min, d + h[:, None], prior.theta_min
            )
            self._tables[level] = (h, d, om.astype(np.float32))
        return self._tables[level]

    def _value(self, level, snr):
        h, d, om = self._table(level)
        p = _pmin_from_om(snr.total(self.cfg), om)
        inner = np.trapezoid(p, d, axis=1)
        return float(np.trapezoid(h * inner, h) / self.prior.span_d)


def _overlap_interval(lo, hi, shift):
    """Base-coordinate interval such that both x and x+shift lie in [lo, hi]."""
    return lo + max(0.0, -shift), hi - max(0.0, shift)


class JointZzbEngine(_ConvergingEngine):
    """Vector-prior ZZB for one parameter under joint (d, theta) uncertainty.

    For the distance parameter the outer offset h runs over [0, T_d] and the
    inner worst case searches the angle displacement; for the angle
    parameter the roles are mirrored.  The (d, theta) integration covers
    the exact region where both endpoints lie inside the prior box, which
    reproduces the printed one-sided limits for nonnegative displacements
    and extends them symmetrically otherwise.

    displacement_search: "symmetric" searches candidates in [-T, +T]
    (default); "nonnegative" restricts to [0, T] (the literal printed
    integration limits).
    """

    def __init__(self, cfg, prior, quad=QuadratureSpec(), parameter="distance",
                 displacement_search="symmetric", cache_budget=DEFAULT_CACHE_BUDGET):
        if parameter not in ("distance", "aoa"):
            raise ValueError(f"unknown parameter {parameter!r}")
        if prior.span_theta <= 0:
            raise ValueError("joint engine needs a nondegenerate angle span")
        if displacement_search not in ("symmetric", "nonnegative"):
            raise ValueError(f"unknown displacement_search {displacement_search!r}")
        super().__init__(quad, parameter)
        self.cfg = cfg
        self.prior = prior
        self.displacement_search = displacement_search
        self.cache_budget = cache_budget
        self._cache = {}

    def _spec_at(self, level):
        spec = self.quad
        for _ in range(level):
            spec = spec.refined()
        return spec

    def _grids(self, spec):
        prior = self.prior
        if self.parameter == "distance":
            outer_span, nuis_span = prior.span_d, prior.span_theta
            n_outer, n_cand = spec.n_h, spec.n_dtheta
        else:
            outer_span, nuis_span = prior.span_theta, prior.span_d
            n_outer, n_cand = spec.n_h, spec.n_dtheta
        h = np.linspace(0.0, outer_span, n_outer)
        if self.displacement_search == "symmetric":
            cand = np.linspace(-nuis_span, nuis_span, n_cand)
        else:
            cand = np.linspace(0.0, nuis_span, n_cand)
        return h, cand

    def _one_minus_rho(self, spec, h, dc):
        """1 - rho on the overlap grid for outer offset h and nuisance
        displacement dc; returns (d_axis, theta_axis, table)."""
        prior = self.prior
        if self.parameter == "distance":
            dd, dth = h, dc
        else:
            dd, dth = dc, h
        d_lo, d_hi = _overlap_interval(prior.d_min, prior.d_max, dd)
        t_lo, t_hi = _overlap_interval(prior.theta_min, prior.theta_max, dth)
        d = np.linspace(d_lo, d_hi, spec.n_d)
        th = np.linspace(t_lo, t_hi, spec.n_theta)
        om = 1.0 - correlation_map(
            self.cfg, d[:, None], th[None, :], d[:, None] + dd, th[None, :] + dth
        )
        return d, th, om.astype(np.float32)

    def _row(self, level, i):
        spec = self._spec_at(level)
        h, cand = self._grids(spec)
        key = (level, i)
        if key in self._cache:
            return self._cache[key]
        row = [self._one_minus_rho(spec, h[i], dc) for dc in cand]
        level_floats = spec.n_h * spec.n_dtheta * spec.n_d * spec.n_theta
        if level_floats <= self.cache_budget:
            self._cache[key] = row
        return row

    def _value(self, level, snr):
        spec = self._spec_at(level)
        h, cand = self._grids(spec)
        total = snr.total(self.cfg)
        outer = np.empty_like(h)
        for i, hi in enumerate(h):
            best = -math.inf
            for d, th, om in self._row(level, i):
                p = _pmin_from_om(total, om)
                val = float(np.trapezoid(np.trapezoid(p, th, axis=1), d))
                if val > best:
                    best = val
            outer[i] = best * hi
        norm = self.prior.span_d * self.prior.span_theta
        return float(np.trapezoid(outer, h) / norm)


def zzb_distance_known_aoa(cfg, snr, prior, quad=QuadratureSpec()):
    """One-shot known-angle distance ZZB (builds a throwaway engine; use
    DistanceKnownAoaZzbEngine directly for SNR sweeps)."""
    return DistanceKnownAoaZzbEngine(cfg, prior, quad).evaluate(snr)


def zzb_distance_joint(cfg, snr, prior, quad=QuadratureSpec(), displacement_search="symmetric"):
    """Distance ZZB under joint (d, theta) uncertainty; degenerates to the
    known-angle bound when the angle span is zero."""
    if prior.angle_degenerate:
        return zzb_distance_known_aoa(cfg, snr, prior, quad)
    engine = JointZzbEngine(cfg, prior, quad, "distance", displacement_search)
    return engine.evaluate(snr)


def zzb_aoa_joint(cfg, snr, prior, quad=QuadratureSpec(), displacement_search="symmetric"):
    """Angle ZZB under joint (d, theta) uncertainty (rad^2)."""
    engine = JointZzbEngine(cfg, prior, quad, "aoa", displacement_search)
    return engine.evaluate(snr)
