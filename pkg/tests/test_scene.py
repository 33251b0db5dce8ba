import math

import numpy as np
import pytest

from sarbackscatter.exceptions import DomainError
from sarbackscatter.link_budget import ImagingGeometry, RadarParams
from sarbackscatter.presets import desk_geometry, desk_radar, sentinel_like_geometry, sentinel_like_radar
from sarbackscatter.processor import range_compress
from sarbackscatter.scene import (
    ClutterSpec,
    ModulationSchedule,
    PointTarget,
    SceneSpec,
    aligned_bit_schedule,
    aligned_square_wave,
    amplitude_constant,
    dwell_time,
    noise_variance,
    num_pulses,
    pulse_times,
    slant_range_history,
    synthesize,
)

EXTENT = (300.0, 200.0)


def scene_with(targets, geometry, **kw):
    return SceneSpec(geometry, tuple(targets), extent=kw.pop("extent", EXTENT), **kw)


def pulse_energy(raw):
    return np.sum(np.abs(raw.samples.astype(np.complex128)) ** 2, axis=1)


def test_dwell_time_examples():
    radar = RadarParams(1.0, 1.0, 0.05, 1e6, 1e-6, 1000.0, 10.0, 7000.0, 300.0)
    assert dwell_time(radar, ImagingGeometry(700e3, 0.5)) == pytest.approx(0.5)
    longer = RadarParams(1.0, 1.0, 0.05, 1e6, 1e-6, 1000.0, 20.0, 7000.0, 300.0)
    assert dwell_time(longer, ImagingGeometry(700e3, 0.5)) == pytest.approx(0.25)
    # order of magnitude of a C-band spaceborne dwell (a few hundred ms)
    assert 0.1 < dwell_time(sentinel_like_radar(), sentinel_like_geometry()) < 1.0


def test_pulse_count_and_times(small_radar, geometry):
    n = num_pulses(small_radar, geometry)
    assert n == round(dwell_time(small_radar, geometry) * small_radar.prf) == 512
    t = pulse_times(small_radar, geometry, 2.0)
    assert np.allclose(np.diff(t), 1 / small_radar.prf)
    assert t.mean() == pytest.approx(2.0)


def test_static_target_echo_energy_and_delay(small_radar, geometry):
    raw = synthesize(scene_with([PointTarget(20.0, -10.0, 5.0)], geometry), small_radar, noise=False)
    e = pulse_energy(raw)
    platform = small_radar.platform_velocity * raw.pulse_times
    r = slant_range_history(geometry, platform, 20.0, -10.0)
    n_chirp = round(small_radar.pulse_duration * raw.sample_rate)
    expected = (amplitude_constant(small_radar) * math.sqrt(5.0) / r**2) ** 2 * n_chirp
    assert np.allclose(e, expected, rtol=1e-5)
    assert e.max() / e.min() - 1 < 1e-4
    rc = range_compress(raw)
    peak = np.argmax(np.abs(rc.samples), axis=1)
    true_bin = (r - rc.range_start) / rc.bin_spacing
    assert np.max(np.abs(peak - true_bin)) <= 1.0


def test_noise_only_power(small_radar, geometry):
    raw = synthesize(scene_with([], geometry), small_radar)
    assert raw.samples.size >= 1e5
    p = np.mean(np.abs(raw.samples.astype(np.complex128)) ** 2)
    assert p == pytest.approx(noise_variance(small_radar, raw.sample_rate), rel=0.05)


def test_zero_rcs_target_gives_noise_only(small_radar, geometry):
    zero = synthesize(scene_with([PointTarget(0, 0, 0.0)], geometry, rng_seed=5), small_radar)
    none = synthesize(scene_with([], geometry, rng_seed=5), small_radar)
    assert np.array_equal(zero.samples, none.samples)


def test_square_wave_energy_ratio(small_radar, geometry):
    sched = ModulationSchedule.square_wave(period=8 / small_radar.prf, phase=0.1 / small_radar.prf)
    tgt = PointTarget(0.0, 0.0, 4.0, 0.25, sched)
    raw = synthesize(scene_with([tgt], geometry), small_radar, noise=False)
    r = slant_range_history(geometry, small_radar.platform_velocity * raw.pulse_times, 0.0, 0.0)
    norm = pulse_energy(raw) * r**4
    on = sched.is_on(raw.pulse_times)
    assert on.any() and (~on).any()
    hi, lo = norm[on], norm[~on]
    assert np.ptp(hi) / hi.mean() < 1e-5 and np.ptp(lo) / lo.mean() < 1e-5
    assert hi.mean() / lo.mean() == pytest.approx(16.0, rel=1e-5)


def test_schedule_sampled_at_pulse_times(small_radar, geometry):
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, 40)
    sched = ModulationSchedule.bit_sequence(bits, symbol_duration=3.3 / small_radar.prf,
                                            start_offset=-0.05)
    tgt = PointTarget(0.0, 0.0, 2.0, 0.5, sched)
    raw = synthesize(scene_with([tgt], geometry), small_radar, noise=False)
    r = slant_range_history(geometry, small_radar.platform_velocity * raw.pulse_times, 0.0, 0.0)
    n_chirp = round(small_radar.pulse_duration * raw.sample_rate)
    rcs_seen = pulse_energy(raw) * r**4 / (amplitude_constant(small_radar) ** 2 * n_chirp)
    assert np.allclose(rcs_seen, tgt.rcs_at(raw.pulse_times), rtol=1e-5)


def test_linearity_two_targets(small_radar, geometry):
    a = PointTarget(-30.0, 10.0, 3.0)
    b = PointTarget(25.0, -20.0, 7.0, 1.0, ModulationSchedule.square_wave(10 / small_radar.prf))
    kw = dict(noise=False, dtype=np.complex128)
    both = synthesize(scene_with([a, b], geometry), small_radar, **kw).samples
    sa = synthesize(scene_with([a], geometry), small_radar, **kw).samples
    sb = synthesize(scene_with([b], geometry), small_radar, **kw).samples
    assert np.max(np.abs(both - (sa + sb))) <= 1e-12 * np.max(np.abs(both))


def test_energy_scales_linearly_with_rcs(small_radar, geometry):
    rcs = np.logspace(-1, 2, 7)
    e = [pulse_energy(synthesize(scene_with([PointTarget(0, 0, s)], geometry), small_radar,
                                 noise=False)).sum() for s in rcs]
    slope = np.polyfit(np.log10(rcs), np.log10(e), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.01)


def test_determinism_and_thread_independence(small_radar, geometry):
    scene = scene_with([PointTarget(0, 0, 1.0)], geometry, clutter=ClutterSpec(0.02), rng_seed=99)
    one = synthesize(scene, small_radar)
    again = synthesize(scene, small_radar)
    threaded = synthesize(scene, small_radar, threads=3, chunk=7)
    assert np.array_equal(one.samples, again.samples)
    assert np.array_equal(one.samples, threaded.samples)
    other = synthesize(scene_with([PointTarget(0, 0, 1.0)], geometry, clutter=ClutterSpec(0.02),
                                  rng_seed=100), small_radar)
    assert not np.array_equal(one.samples, other.samples)


def test_clutter_power_scales_with_sigma0(small_radar, geometry):
    def power(s0):
        raw = synthesize(scene_with([], geometry, clutter=ClutterSpec(s0), rng_seed=4), small_radar, noise=False)
        return np.mean(np.abs(raw.samples.astype(np.complex128)) ** 2)
    assert power(0.4) / power(0.1) == pytest.approx(4.0, rel=1e-5)


def test_output_is_immutable(small_radar, geometry):
    raw = synthesize(scene_with([], geometry), small_radar)
    with pytest.raises(ValueError):
        raw.samples[0, 0] = 1.0


def test_target_outside_scene(small_radar, geometry):
    with pytest.raises(DomainError, match="outside"):
        synthesize(scene_with([PointTarget(0.0, 150.0, 1.0)], geometry), small_radar)
    with pytest.raises(DomainError, match="resolution cells"):
        synthesize(scene_with([PointTarget(140.0, 0.0, 1.0)], geometry), small_radar)


def test_symbol_rate_limit(small_radar, geometry):
    fast = ModulationSchedule.bit_sequence([1, 0, 1], symbol_duration=1.5 / small_radar.prf)
    with pytest.raises(DomainError, match="two pulses"):
        synthesize(scene_with([PointTarget(0, 0, 1.0, 0.0, fast)], geometry), small_radar)
    with pytest.raises(DomainError):
        ModulationSchedule.square_wave(3 / small_radar.prf).check_rate(small_radar.prf)


def test_sample_rate_below_bandwidth(small_radar, geometry):
    with pytest.raises(DomainError):
        synthesize(scene_with([], geometry), small_radar, sample_rate=0.5 * small_radar.chirp_bandwidth)


def test_schedule_kinds():
    t = np.array([-1.0, 0.0, 0.4, 0.5, 0.9, 1.0])
    assert ModulationSchedule.static(True).is_on(t).all()
    assert not ModulationSchedule.static(False).is_on(t).any()
    assert list(ModulationSchedule.square_wave(1.0).is_on(t)) == [True, True, True, False, False, True]
    seq = ModulationSchedule.bit_sequence([1, 0], 0.5, start_offset=0.0)
    assert list(seq.is_on(t)) == [False, True, True, False, False, False]
    with pytest.raises(DomainError):
        ModulationSchedule(kind="chirp")
    with pytest.raises(DomainError):
        PointTarget(0, 0, 1.0, 2.0)


def test_schedule_round_trip():
    for s in (ModulationSchedule.static(), ModulationSchedule.square_wave(0.1, 0.01),
              ModulationSchedule.bit_sequence([1, 0, 1, 1], 0.02, -0.1)):
        assert ModulationSchedule.from_dict(s.to_dict()) == s


def test_aligned_schedules_fill_whole_blocks(small_radar, geometry):
    from sarbackscatter.link_budget import sublook_plan
    t = pulse_times(small_radar, geometry)
    bits = [1, 0, 0, 1, 1, 0, 1]
    for lps in (1, 2, 3):
        on = aligned_bit_schedule(bits, small_radar, geometry, lps).is_on(t)
        plan = sublook_plan(t.size, len(bits) * lps, small_radar.prf)
        frac = np.array([on[a:b].mean() for a, b in plan.blocks])
        assert set(np.unique(frac)) <= {0.0, 1.0}
        assert list(frac.astype(int)) == list(np.repeat(bits, lps))
    sq = aligned_square_wave(small_radar, geometry, 6).is_on(t)
    plan = sublook_plan(t.size, 6, small_radar.prf)
    assert [sq[a:b].mean() for a, b in plan.blocks] == [1, 0, 1, 0, 1, 0]


def test_scene_round_trip(geometry):
    s = SceneSpec(geometry, (PointTarget(1.0, 2.0, 3.0, 0.5, ModulationSchedule.square_wave(0.1)),),
                  ClutterSpec(0.01, (3.0, 2.0)), (400.0, 300.0), 12345, 0.25)
    assert SceneSpec.from_dict(s.to_dict()) == s
