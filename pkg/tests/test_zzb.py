import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nfzzb import (
    ArrayConfig,
    DistanceKnownAoaZzbEngine,
    JointZzbEngine,
    PriorBox,
    QuadratureSpec,
    SnrSpec,
    correlation_map,
    q_function,
    zzb_aoa_joint,
    zzb_distance_joint,
    zzb_distance_known_aoa,
    zzb_highsnr_asymptote,
    zzb_prior_limit,
)

CHEAP_CFG = ArrayConfig(5, 0.05, 3e9)  # 0.2 m aperture, lambda = 10 cm
CHEAP_PRIOR = PriorBox(0.5, 2.0)
CHEAP_QUAD = QuadratureSpec(n_h=32, n_d=16, n_theta=4, n_dtheta=5, max_doublings=1)
TINY_QUAD = QuadratureSpec(n_h=8, n_d=8, n_theta=2, n_dtheta=3, max_doublings=0)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(n_h=1)
    with pytest.raises(ValueError):
        QuadratureSpec(n_dtheta=4)  # even
    with pytest.raises(ValueError):
        QuadratureSpec(convergence_target=0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_doublings=-1)
    refined = QuadratureSpec(n_h=16, n_d=8, n_theta=4, n_dtheta=5).refined()
    assert (refined.n_h, refined.n_d, refined.n_theta, refined.n_dtheta) == (32, 16, 8, 9)


def test_prior_limit():
    assert zzb_prior_limit(PriorBox(0.0, 5.0)) == pytest.approx(25.0 / 12.0)
    prior = PriorBox(1.0, 2.0, -0.2, 0.2)
    assert zzb_prior_limit(prior, "aoa") == pytest.approx(0.4 ** 2 / 12.0)
    with pytest.raises(ValueError):
        zzb_prior_limit(prior, "range")


def test_low_snr_saturates_near_prior_variance():
    # 21 antennas over a 1 m aperture, distance prior [0, 5] m, -40 dB:
    # the bound sits just under the uniform-prior variance 25/12
    cfg = ArrayConfig.from_aperture(21, 1.0, 28e9)
    prior = PriorBox(0.0, 5.0)
    quad = QuadratureSpec(n_h=256, n_d=128, n_theta=4, n_dtheta=5, max_doublings=2)
    res = DistanceKnownAoaZzbEngine(cfg, prior, quad).evaluate(SnrSpec.from_db(-40))
    limit = zzb_prior_limit(prior)
    assert res.converged
    assert 0.95 * limit <= res.value <= 1.001 * limit
    assert res.value == pytest.approx(2.01869873, rel=1e-6)


def test_monotone_nonincreasing_in_snr():
    engine = DistanceKnownAoaZzbEngine(CHEAP_CFG, CHEAP_PRIOR, CHEAP_QUAD)
    values = [engine.evaluate(SnrSpec.from_db(db)).value for db in (-20, -10, 0, 10, 20)]
    for a, b in zip(values, values[1:]):
        assert b <= a * (1.0 + CHEAP_QUAD.convergence_target)


def test_joint_degenerates_to_known_aoa():
    res_joint = zzb_distance_joint(CHEAP_CFG, SnrSpec(1.0), CHEAP_PRIOR, CHEAP_QUAD)
    res_known = zzb_distance_known_aoa(CHEAP_CFG, SnrSpec(1.0), CHEAP_PRIOR, CHEAP_QUAD)
    assert res_joint.value == res_known.value


def test_joint_approaches_known_aoa_for_narrow_angle_span():
    snr = SnrSpec(10.0)
    known = zzb_distance_known_aoa(CHEAP_CFG, snr, CHEAP_PRIOR, CHEAP_QUAD).value
    narrow = PriorBox(0.5, 2.0, -1e-4, 1e-4)
    joint = zzb_distance_joint(CHEAP_CFG, snr, narrow, CHEAP_QUAD).value
    assert joint == pytest.approx(known, rel=0.05)


def _fixed_zero_displacement_value(cfg, prior, quad, snr):
    """Joint quadrature with the nuisance displacement pinned at zero."""
    h = np.linspace(0.0, prior.span_d, quad.n_h)
    outer = np.empty_like(h)
    total = snr.total(cfg)
    for i, hi in enumerate(h):
        d = np.linspace(prior.d_min, prior.d_max - hi, quad.n_d)
        th = np.linspace(prior.theta_min, prior.theta_max, quad.n_theta)
        om = 1.0 - correlation_map(cfg, d[:, None], th[None, :], d[:, None] + hi, th[None, :])
        p = q_function(np.sqrt(total * np.clip(om, 0.0, None)))
        outer[i] = hi * np.trapezoid(np.trapezoid(p, th, axis=1), d)
    return float(np.trapezoid(outer, h) / (prior.span_d * prior.span_theta))


def test_inner_max_dominates_zero_displacement():
    prior = PriorBox(0.5, 2.0, -0.3, 0.3)
    quad = QuadratureSpec(n_h=16, n_d=12, n_theta=8, n_dtheta=5, max_doublings=0)
    for db in (-5.0, 5.0, 15.0):
        snr = SnrSpec.from_db(db)
        joint = JointZzbEngine(CHEAP_CFG, prior, quad, "distance").evaluate(snr).value
        pinned = _fixed_zero_displacement_value(CHEAP_CFG, prior, quad, snr)
        # the engine stores its correlation tables in float32, so allow
        # that much rounding on the comparison
        assert joint >= pinned * (1.0 - 1e-6)


def test_aoa_bound_respects_its_prior_ceiling():
    prior = PriorBox(0.5, 2.0, -0.4, 0.4)
    quad = QuadratureSpec(n_h=16, n_d=8, n_theta=8, n_dtheta=5, max_doublings=0)
    res = zzb_aoa_joint(CHEAP_CFG, SnrSpec.from_db(-30), prior, quad)
    assert res.parameter == "aoa"
    assert 0.0 <= res.value <= zzb_prior_limit(prior, "aoa") * 1.01


def test_highsnr_asymptote_requires_broadside_degenerate_prior():
    cfg = ArrayConfig.from_aperture(21, 1.0, 28e9)
    with pytest.raises(ValueError):
        zzb_highsnr_asymptote(cfg, SnrSpec(1.0), PriorBox(0.0, 5.0, -0.1, 0.1))
    value = zzb_highsnr_asymptote(cfg, SnrSpec(1.0), PriorBox(0.0, 5.0))
    assert value > 0
    # 1/SNR scaling
    assert zzb_highsnr_asymptote(cfg, SnrSpec(2.0), PriorBox(0.0, 5.0)) == pytest.approx(
        value / 2.0, rel=1e-12
    )


def test_engine_rejects_mismatched_priors():
    with pytest.raises(ValueError):
        DistanceKnownAoaZzbEngine(CHEAP_CFG, PriorBox(0.5, 2.0, -0.1, 0.1))
    with pytest.raises(ValueError):
        JointZzbEngine(CHEAP_CFG, CHEAP_PRIOR)
    with pytest.raises(ValueError):
        JointZzbEngine(CHEAP_CFG, PriorBox(0.5, 2.0, -0.1, 0.1), parameter="range")


def test_unconverged_flag_with_zero_tolerance():
    # an unreachable tolerance must be reported, not hidden
    quad = QuadratureSpec(n_h=8, n_d=8, n_theta=2, n_dtheta=3,
                          convergence_target=1e-12, max_doublings=1)
    res = DistanceKnownAoaZzbEngine(CHEAP_CFG, CHEAP_PRIOR, quad).evaluate(SnrSpec(1.0))
    assert not res.converged


# ------------------------------------------------------------- properties

@settings(max_examples=100, deadline=None)
@given(
    st.sampled_from([3, 5, 7]),
    st.floats(0.01, 0.1),
    st.floats(1e9, 10e9),
    st.floats(0.1, 2.0),
    st.floats(0.5, 3.0),
    st.floats(-30.0, 30.0),
)
def test_known_aoa_bound_within_prior_ceiling(k, spacing, fc, d_min, span, snr_db):
    cfg = ArrayConfig(k, spacing, fc)
    prior = PriorBox(d_min, d_min + span)
    res = DistanceKnownAoaZzbEngine(cfg, prior, TINY_QUAD).evaluate(SnrSpec.from_db(snr_db))
    assert 0.0 <= res.value <= zzb_prior_limit(prior) * 1.01


@settings(max_examples=60, deadline=None)
@given(
    st.sampled_from([3, 5]),
    st.floats(0.01, 0.1),
    st.floats(0.5, 2.0),
    st.floats(0.05, 0.5),
    st.floats(-20.0, 20.0),
)
def test_joint_bound_within_prior_ceiling(k, spacing, d_min, half_span_theta, snr_db):
    cfg = ArrayConfig(k, spacing, 3e9)
    prior = PriorBox(d_min, d_min + 1.0, -half_span_theta, half_span_theta)
    snr = SnrSpec.from_db(snr_db)
    for parameter in ("distance", "aoa"):
        res = JointZzbEngine(cfg, prior, TINY_QUAD, parameter).evaluate(snr)
        assert 0.0 <= res.value <= zzb_prior_limit(prior, parameter) * 1.01
