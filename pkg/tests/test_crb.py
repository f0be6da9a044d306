import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nfzzb import (
    ArrayConfig,
    PolarPosition,
    PriorBox,
    SnrSpec,
    crb_aoa_local,
    crb_distance_local,
    crb_global,
    crb_global_distance_closed,
    numerical_fim,
)
from nfzzb.crb import FisherMatrix

CFG = ArrayConfig(21, 0.05, 28e9)  # 1 m aperture at 28 GHz
SNR1 = SnrSpec(1.0)


def small_arrays():
    return st.builds(
        ArrayConfig,
        st.sampled_from([5, 7, 9, 11]),
        st.floats(1e-3, 0.1),
        st.floats(1e9, 60e9),
    )


def positions():
    return st.builds(PolarPosition, st.floats(0.5, 20.0), st.floats(-1.2, 1.2))


# ---------------------------------------------------------------- oracles

def test_local_crb_frozen_values():
    p = PolarPosition(3.0, 0.0)
    assert crb_distance_local(CFG, SNR1, p) == pytest.approx(3.3552099463449096e-3, rel=1e-12)
    # broadside closed form checked against a hand evaluation:
    # 3 c^2 / (2 pi^2 fc^2 K SNR delta^2 (K^2 - 1))
    expect_aoa = 3.0 * 299792458.0 ** 2 / (
        2.0 * math.pi ** 2 * (28e9) ** 2 * 21 * 0.05 ** 2 * (21 ** 2 - 1)
    )
    assert crb_aoa_local(CFG, SNR1, p) == pytest.approx(expect_aoa, rel=1e-12)


def test_global_closed_form_frozen_value():
    assert crb_global_distance_closed(CFG, SNR1, 5.0) == pytest.approx(
        6.222412890462956e-3, rel=1e-12
    )


def test_global_average_between_min_and_max_local():
    prior = PriorBox(1.0, 5.0)
    avg = crb_global(CFG, SNR1, prior)
    lo = crb_distance_local(CFG, SNR1, PolarPosition(1.0, 0.0))
    hi = crb_distance_local(CFG, SNR1, PolarPosition(5.0, 0.0))
    assert lo < avg < hi


def test_global_shrinking_box_converges_to_local():
    p = PolarPosition(3.0, 0.2)
    local = crb_distance_local(CFG, SNR1, p)
    for eps, tol in ((0.1, 1e-2), (0.01, 1e-4)):
        prior = PriorBox(p.d - eps, p.d + eps, p.theta - eps, p.theta + eps)
        avg = crb_global(CFG, SNR1, prior)
        assert avg == pytest.approx(local, rel=3 * tol)


def test_numerical_fim_matches_closed_forms():
    for theta, tol11, tol22 in ((0.0, 0.05, 0.05), (math.radians(30), 0.05, 0.10)):
        p = PolarPosition(3.0, theta)
        inv = numerical_fim(CFG, SNR1, p).inverse()
        assert inv[0, 0] == pytest.approx(crb_distance_local(CFG, SNR1, p), rel=tol11)
        assert inv[1, 1] == pytest.approx(crb_aoa_local(CFG, SNR1, p), rel=tol22)


def test_numerical_fim_fresnel_region():
    # the closed forms hold across the Fresnel-valid distances; the
    # approximation error grows toward the near edge (~9% at 2 apertures,
    # broadside), so the tolerance is distance-dependent
    for d, tol in ((2.0, 0.10), (5.0, 0.05), (10.0, 0.05)):
        for theta in (0.0, math.radians(30), math.radians(-30)):
            p = PolarPosition(d, theta)
            inv = numerical_fim(CFG, SNR1, p).inverse()
            assert inv[0, 0] == pytest.approx(crb_distance_local(CFG, SNR1, p), rel=tol)


def test_fisher_matrix_singular_raises():
    with pytest.raises(np.linalg.LinAlgError):
        FisherMatrix(np.array([[1.0, 1.0], [1.0, 1.0]])).inverse()


def test_endfire_singularity_rejected():
    with pytest.raises(ValueError):
        crb_distance_local(CFG, SNR1, PolarPosition(3.0, math.pi / 2 - 1e-16))


def test_fim_step_validation():
    with pytest.raises(ValueError):
        numerical_fim(CFG, SNR1, PolarPosition(3.0, 0.0), step=1e-2)


def test_prior_box_validation():
    with pytest.raises(ValueError):
        PriorBox(5.0, 1.0)
    with pytest.raises(ValueError):
        PriorBox(0.0, 5.0, 0.3, -0.3)
    box = PriorBox(0.0, 5.0)
    assert box.angle_degenerate
    with pytest.raises(ValueError):
        box.density()


# ------------------------------------------------------------- properties

@settings(max_examples=120, deadline=None)
@given(small_arrays(), positions(), st.floats(0.01, 100.0))
def test_local_crbs_positive_and_snr_homogeneous(cfg, p, snr_lin):
    snr = SnrSpec(snr_lin)
    for fn in (crb_distance_local, crb_aoa_local):
        base = fn(cfg, snr, p)
        assert base > 0
        assert fn(cfg, SnrSpec(2.0 * snr_lin), p) == pytest.approx(base / 2.0, rel=1e-12)


@settings(max_examples=120, deadline=None)
@given(small_arrays(), st.floats(0.5, 10.0), st.floats(0.01, 100.0))
def test_distance_crb_d4_scaling_at_broadside(cfg, d, snr_lin):
    snr = SnrSpec(snr_lin)
    ratio = crb_distance_local(cfg, snr, PolarPosition(2.0 * d, 0.0)) / crb_distance_local(
        cfg, snr, PolarPosition(d, 0.0)
    )
    assert 15.9 <= ratio <= 16.1
