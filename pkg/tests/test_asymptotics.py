import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from nfzzb import (
    ArrayConfig,
    Displacement,
    PolarPosition,
    PriorBox,
    SnrSpec,
    correlation,
    fresnel_integrals,
    gamma_coefficient,
    highsnr_integral_closed,
    lobe_parameter,
    pmin_small_h,
    q_function,
    rho_fresnel,
    rho_taylor,
)

HALF_WAVE = ArrayConfig(201, 299792458.0 / 28e9 / 2.0, 28e9)


def test_fresnel_frozen_values():
    pair = fresnel_integrals(1.0)
    assert pair.c_value == pytest.approx(0.7798934003768228, abs=1e-9)
    assert pair.s_value == pytest.approx(0.4382591473903548, abs=1e-9)
    zero = fresnel_integrals(0.0)
    assert zero.c_value == 0.0 and zero.s_value == 0.0
    with pytest.raises(ValueError):
        fresnel_integrals(-1.0)


def test_fresnel_against_direct_quadrature():
    for u in (0.3, 1.0, 2.5, 5.0):
        c_ref, _ = quad(lambda t: math.cos(math.pi * t * t / 2.0), 0.0, u)
        s_ref, _ = quad(lambda t: math.sin(math.pi * t * t / 2.0), 0.0, u)
        pair = fresnel_integrals(u)
        assert pair.c_value == pytest.approx(c_ref, abs=1e-9)
        assert pair.s_value == pytest.approx(s_ref, abs=1e-9)


def test_fresnel_large_u_oscillates_about_half():
    # envelope about the 0.5 limit decays like 1/(pi*u)
    for u in (5.0, 10.0, 20.0):
        pair = fresnel_integrals(u)
        env = 1.0 / (math.pi * u) + 1e-9
        assert abs(pair.c_value - 0.5) <= env
        assert abs(pair.s_value - 0.5) <= env


@settings(max_examples=150, deadline=None)
@given(st.floats(0.0, 50.0))
def test_fresnel_magnitude_bounded_by_u(u):
    pair = fresnel_integrals(u)
    assert pair.c_value ** 2 + pair.s_value ** 2 <= u * u + 1e-12


def test_u_times_q_integral_is_quarter():
    value, err = quad(lambda u: u * q_function(u), 0.0, np.inf)
    assert err < 1e-8
    assert value == pytest.approx(0.25, abs=1e-6)


def test_lobe_parameter_forms():
    nu_large = lobe_parameter(HALF_WAVE, 3.0, 0.2)
    nu_exact = lobe_parameter(HALF_WAVE, 3.0, 0.2, large_k=False)
    assert nu_large > nu_exact > 0
    assert nu_large / nu_exact == pytest.approx(201.0 / 200.0, rel=1e-12)
    assert lobe_parameter(HALF_WAVE, 3.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        lobe_parameter(HALF_WAVE, -1.0, 0.1)


def test_rho_chain_agreement_small_nu():
    # Fresnel form, Taylor form and the exact correlation agree within
    # 1e-2 absolute while the lobe parameter stays below 0.3
    for d in (2.0, 3.0, 5.0):
        for h in (0.002, 0.005, 0.01):
            nu = lobe_parameter(HALF_WAVE, d, h)
            if nu > 0.3:
                continue
            rf = rho_fresnel(HALF_WAVE, d, h)
            rt = rho_taylor(HALF_WAVE, d, h)
            rx = correlation(HALF_WAVE, PolarPosition(d, 0.0), Displacement(h))
            assert rf == pytest.approx(rt, abs=1e-2)
            assert rf == pytest.approx(rx, abs=1e-2)
            assert rt == pytest.approx(rx, abs=1e-2)


def test_rho_fresnel_limits():
    assert rho_fresnel(HALF_WAVE, 3.0, 0.0) == 1.0
    assert rho_fresnel(HALF_WAVE, 3.0, 2.0) < 0.3  # far off the main lobe


def test_pmin_small_h_matches_kernel_definition():
    snr = SnrSpec(1.0)
    gamma = gamma_coefficient(HALF_WAVE, snr)
    d, h = 3.0, 0.004
    assert pmin_small_h(HALF_WAVE, snr, d, h) == pytest.approx(
        q_function(gamma * h / (d * d)), rel=1e-12
    )
    assert pmin_small_h(HALF_WAVE, snr, d, 0.0) == 0.5


def test_highsnr_closed_form_matches_brute_force():
    prior = PriorBox(1.0, 5.0)
    d_max = prior.d_max
    # pick gamma deep in the asymptotic regime: gamma * T_d / d_max^2 >= 50
    for scale in (50.0, 200.0):
        gamma = scale * d_max * d_max / prior.span_d
        closed = highsnr_integral_closed(gamma, prior)
        h = np.linspace(0.0, prior.span_d, 4001)
        d = np.linspace(prior.d_min, prior.d_max, 801)
        inner = np.trapezoid(q_function(gamma * h[:, None] / (d[None, :] ** 2)), d, axis=1)
        brute = np.trapezoid(h * inner, h) / prior.span_d
        assert closed == pytest.approx(brute, rel=0.01)


def test_highsnr_closed_form_validation():
    with pytest.raises(ValueError):
        highsnr_integral_closed(0.0, PriorBox(1.0, 5.0))
    with pytest.raises(ValueError):
        highsnr_integral_closed(10.0, PriorBox(1.0, 5.0, -0.1, 0.1))
