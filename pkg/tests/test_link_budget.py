import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sarbackscatter.exceptions import DomainError, PlanError
from sarbackscatter.link_budget import (
    FOOT,
    SPEED_OF_LIGHT,
    ImagingGeometry,
    RadarParams,
    ReflectorGeometry,
    azimuth_resolution,
    coherent_sample_counts,
    ebno_from_power_contrast,
    from_db,
    ground_range_resolution,
    image_snr,
    max_bit_rate,
    max_throughput,
    ook_ber,
    ook_ber_sublook,
    pass_ber,
    q_function,
    rcs_max,
    scr,
    single_pulse_snr,
    sublook_plan,
    to_db,
)

LAMBDA_5G4 = SPEED_OF_LIGHT / 5.4e9


def simpson_tail(x, n=4000, upper=40.0):
    """Gaussian upper tail by composite Simpson on [x, upper]."""
    t = np.linspace(x, upper, n + 1)
    f = np.exp(-0.5 * t**2) / math.sqrt(2 * math.pi)
    h = (upper - x) / n
    return h / 3 * (f[0] + f[-1] + 4 * f[1:-1:2].sum() + 2 * f[2:-1:2].sum())


def make_radar(**kw):
    base = dict(transmit_power=1000.0, antenna_gain=10**4.5, wavelength=0.05547, chirp_bandwidth=50e6,
                pulse_duration=50e-6, prf=1000.0, antenna_length=10.0, platform_velocity=7000.0,
                system_noise_temp=500.0)
    base.update(kw)
    return RadarParams(**base)


# --- RCS -------------------------------------------------------------------

@pytest.mark.parametrize("feet, expected_dbsm, tol", [(2, 32.4, 0.2), (3, 39.3, 0.1), (4, 44.3, 0.2)])
def test_rcs_of_square_trihedral_panels(feet, expected_dbsm, tol):
    lam = 0.05547
    assert to_db(rcs_max(feet * FOOT, lam)) == pytest.approx(expected_dbsm, abs=tol)


def test_rcs_triple_at_5_4_ghz():
    got = [float(to_db(rcs_max(f * FOOT, LAMBDA_5G4))) for f in (2, 3, 4)]
    assert np.allclose(got, [32.4, 39.3, 44.4], atol=0.2)


def test_rcs_doubling_side_is_sixteen_fold():
    assert rcs_max(1.0, 0.05) * 16 == pytest.approx(rcs_max(2.0, 0.05), rel=1e-15)
    assert to_db(16.0) == pytest.approx(12.0412, abs=1e-4)


@pytest.mark.parametrize("d, lam", [(0.0, 0.05), (-1.0, 0.05), (1.0, 0.0)])
def test_rcs_rejects_non_positive(d, lam):
    with pytest.raises(DomainError):
        rcs_max(d, lam)


def test_small_panel_is_flagged():
    with pytest.warns(UserWarning):
        r = ReflectorGeometry.from_panel(0.3, 0.05547)
    assert r.small_panel
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert not ReflectorGeometry.from_panel(0.9144, 0.05547).small_panel


def test_reflector_needs_contrast():
    with pytest.raises(DomainError):
        ReflectorGeometry(1.0, rcs_on=1.0, rcs_off=1.0)


# --- resolution ------------------------------------------------------------

def test_ground_range_resolution_examples():
    assert ground_range_resolution(1.499e8, math.pi / 2) == pytest.approx(SPEED_OF_LIGHT / 2.998e8, rel=1e-12)
    assert ground_range_resolution(1.499e8, math.pi / 2) == pytest.approx(1.0, abs=1e-3)
    assert ground_range_resolution(56.5e6, math.radians(39)) == pytest.approx(4.22, abs=0.005)
    assert ground_range_resolution(25e6, 0.5) == 2 * ground_range_resolution(50e6, 0.5)


def test_ground_range_resolution_grazing_is_error():
    with pytest.raises(DomainError):
        ground_range_resolution(50e6, 0.0)


def test_azimuth_resolution():
    assert azimuth_resolution(12.3) == pytest.approx(6.15)
    assert azimuth_resolution(12.3, 4) == pytest.approx(24.6)
    assert azimuth_resolution(12.3, 6) == 2 * azimuth_resolution(12.3, 3)
    with pytest.raises(DomainError):
        azimuth_resolution(12.3, 0)


# --- SNR chain -------------------------------------------------------------

def test_single_pulse_snr_matches_independent_evaluation():
    radar = make_radar()
    geom = ImagingGeometry(700e3, 0.6, scatter_area=100.0)
    mp = mpmath.mp
    mp.dps = 30
    oracle = (mpmath.mpf(1000) * mpmath.mpf(10) ** 9 * 100 * mpmath.mpf("0.05547") ** 2
              / ((4 * mpmath.pi) ** 3 * mpmath.mpf(700e3) ** 4 * mpmath.mpf("1.380649e-23") * 500 * 50e6))
    assert single_pulse_snr(radar, geom, 1.0) == pytest.approx(float(oracle), rel=1e-12)
    assert single_pulse_snr(radar, geom, 1.0) == pytest.approx(1.870989233e-3, rel=1e-9)


def test_single_pulse_snr_range_law_and_zero():
    radar = make_radar()
    near = single_pulse_snr(radar, ImagingGeometry(500e3, 0.6), 0.1)
    far = single_pulse_snr(radar, ImagingGeometry(1000e3, 0.6), 0.1)
    assert near / far == pytest.approx(16.0, rel=1e-12)
    assert single_pulse_snr(radar, ImagingGeometry(500e3, 0.6), 0.0) == 0.0


def test_coherent_sample_counts():
    radar = make_radar(wavelength=0.05)
    counts = coherent_sample_counts(radar, ImagingGeometry(700e3, 0.6))
    assert counts.n_range == pytest.approx(2500.0)
    assert counts.n_azimuth == pytest.approx(500.0)
    assert (counts.n_range_int, counts.n_azimuth_int) == (2500, 500)
    tiny = coherent_sample_counts(make_radar(pulse_duration=1e-9), ImagingGeometry(700e3, 0.6))
    assert tiny.n_range == pytest.approx(0.05)
    assert tiny.n_range_int == 0


def test_image_snr():
    assert image_snr(0.3, 1, 1, 1) == 0.3
    assert image_snr(1e-6, 2500, 500, 4) == pytest.approx(0.3125)
    full, half = image_snr(1e-3, 100, 100, 1), image_snr(1e-3, 100, 100, 2)
    assert to_db(full) - to_db(half) == pytest.approx(3.0103, abs=1e-4)


def test_scr():
    assert scr(0.2, 0.2) == 1.0
    assert to_db(scr(100.0, 1.0)) == pytest.approx(20.0)
    assert scr(0.0, 1.0) == 0.0
    with pytest.raises(DomainError, match="infinite SCR"):
        scr(1.0, 0.0)


# --- sublook plan, throughput ----------------------------------------------

def test_sublook_plan_examples():
    plan = sublook_plan(500, 10, 1000.0)
    assert plan.delta_t == pytest.approx(0.05)
    assert np.allclose(np.diff(plan.center_times), 0.05)
    assert sublook_plan(500, 1, 1000.0, pass_center_time=3.0).center_times == pytest.approx((3.0,))
    assert sublook_plan(500, 500, 1000.0).delta_t == pytest.approx(1e-3)


def test_sublook_plan_symmetric_remainder():
    plan = sublook_plan(103, 10, 100.0, pass_center_time=1.0)
    assert plan.pulses_per_sublook == 10
    assert plan.start_pulse == 1
    assert np.mean(plan.center_times) == pytest.approx(1.0, abs=0.5 / 100.0)
    assert plan.blocks[-1][1] <= 103


def test_sublook_plan_too_many_looks():
    with pytest.raises(PlanError):
        sublook_plan(10, 11, 100.0)


@given(n=st.integers(1, 5000), m=st.integers(1, 5000), center=st.floats(-10, 10))
@settings(max_examples=200, deadline=None)
def test_sublook_plan_properties(n, m, center):
    if m > n:
        with pytest.raises(PlanError):
            sublook_plan(n, m, 1000.0)
        return
    plan = sublook_plan(n, m, 1000.0, center)
    assert plan.pulses_per_sublook == n // m
    times = np.asarray(plan.center_times)
    if m > 1:
        assert np.all(np.diff(times) > 0)
        assert np.allclose(np.diff(times), plan.delta_t, rtol=1e-9, atol=1e-9)
    # symmetric drop: centre of the kept pulses is within half a pulse of the pass centre
    assert abs(times.mean() - center) <= 0.5 / 1000.0 + 1e-9
    blocks = plan.blocks
    assert blocks[0][0] >= 0 and blocks[-1][1] <= n
    assert all(b[1] == nb[0] for b, nb in zip(blocks, blocks[1:]))


def test_bit_rate_and_throughput():
    assert max_bit_rate(1000.0) == 500.0
    assert max_bit_rate(3000.0) == 1500.0
    assert max_throughput(500) == 250.0


# --- Q function and BER ------------------------------------------------------

def test_q_function_fixed_points():
    assert q_function(0.0) == 0.5
    assert np.all(q_function(np.zeros(3)) == 0.5)


@pytest.mark.parametrize("x", np.linspace(0.0, 8.0, 33))
def test_q_function_against_simpson_oracle(x):
    assert abs(q_function(x) - simpson_tail(x)) < 1e-10


@pytest.mark.parametrize("x", [0.1, 1.0, 2.5, 4.0, 6.0, 8.0])
def test_q_function_against_high_precision_erfc(x):
    mpmath.mp.dps = 40
    oracle = float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)
    assert q_function(x) == pytest.approx(oracle, rel=1e-12)


@given(st.floats(-8, 8))
def test_q_function_symmetry(x):
    assert abs(q_function(x) + q_function(-x) - 1.0) < 1e-12


def test_q_function_vectorised_matches_scalar():
    xs = np.linspace(-3, 8, 50)
    assert np.allclose(q_function(xs), [q_function(float(x)) for x in xs], rtol=1e-14, atol=0)


def test_ook_ber_spot_values():
    with pytest.warns(UserWarning):
        assert ook_ber(1.0, 1.0, 1) == 0.5
    snr = 2 * 4 * 10**0.7  # (on - off) / (2 m) = 10**0.7 with m = 4
    mpmath.mp.dps = 40
    oracle = float(mpmath.erfc(mpmath.sqrt(mpmath.mpf(10) ** mpmath.mpf("0.7")) / mpmath.sqrt(2)) / 2)
    assert ook_ber(snr, 0.0, 4) == pytest.approx(oracle, rel=1e-12)
    assert ook_ber(snr, 0.0, 4) == pytest.approx(0.01256, rel=5e-3)


def test_ten_db_contrast_is_seven_db_ebno():
    # 10 dB less a halving (3.01 dB) is 6.99 dB, quoted as 7 dB
    assert ebno_from_power_contrast(10.0) == pytest.approx(7.0, abs=0.05)


def test_radiometric_floor_optional():
    assert ook_ber(100.0, 0.0, 4) > 0
    with pytest.raises(DomainError):
        ook_ber(100.0, 0.0, 4, radiometric_floor=30.0)
    assert ook_ber(100.0, 0.0, 4, radiometric_floor=10.0) == ook_ber(100.0, 0.0, 4)


@given(on=st.floats(1e-3, 1e4), off_frac=st.floats(0, 0.99), m=st.integers(1, 512), k=st.floats(1.01, 10))
@settings(max_examples=200)
def test_ook_ber_monotone(on, off_frac, m, k):
    off = on * off_frac
    base = ook_ber(on, off, m)
    # a larger on/off gap never hurts; more looks never help
    assert ook_ber(off + (on - off) * k, off, m) <= base
    assert ook_ber(on, off, m + 1) >= base
    if 1e-300 < base < 0.5 - 1e-12:
        assert ook_ber(off + (on - off) * k, off, m) < base


@given(snr_o=st.floats(1e-8, 1e-1), nr=st.integers(1, 5000), na=st.integers(1, 5000), m=st.integers(1, 64),
       off_frac=st.floats(0, 0.9))
def test_sublook_form_equals_full_image_form(snr_o, nr, na, m, off_frac):
    on_img, off_img = image_snr(snr_o, nr, na), image_snr(snr_o * off_frac, nr, na)
    on_look, off_look = image_snr(snr_o, nr, na, m), image_snr(snr_o * off_frac, nr, na, m)
    assert ook_ber_sublook(on_look, off_look) == pytest.approx(ook_ber(on_img, off_img, m), rel=1e-12, abs=1e-300)


def test_pass_level_mapping_red_dot():
    # 25 dB of pass-level Eb/N0 spread over 60 bits lands near 1 % BER
    assert pass_ber(25.0, 60) == pytest.approx(0.0109, abs=5e-4)
    assert pass_ber(25.0, 30) < pass_ber(25.0, 60) < pass_ber(25.0, 120)


def test_db_helpers_round_trip():
    x = np.array([1e-3, 1.0, 42.0])
    assert np.allclose(from_db(to_db(x)), x, rtol=1e-14)


def test_formulas_are_pure():
    r, g = make_radar(), ImagingGeometry(700e3, 0.6)
    assert single_pulse_snr(r, g, 0.3) == single_pulse_snr(r, g, 0.3)
    assert ook_ber(10.0, 1.0, 3) == ook_ber(10.0, 1.0, 3)


def test_radar_invariants():
    with pytest.raises(DomainError):
        make_radar(prf=30e3)  # duty cycle 1.5
    with pytest.raises(DomainError):
        make_radar(transmit_power=0.0)
    r = RadarParams.from_carrier(5.4e9, **{k: v for k, v in make_radar().__dict__.items() if k != "wavelength"})
    assert r.wavelength == pytest.approx(SPEED_OF_LIGHT / 5.4e9)
    with pytest.raises(DomainError):
        ImagingGeometry(700e3, math.pi / 2)
