"""Monte-Carlo BER sweep over complete simulate -> process -> demodulate chains."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .demod import default_windows, decide_bits, measure_coherent, measure_scr
from .link_budget import ImagingGeometry, RadarParams, from_db, ook_ber, single_pulse_snr
from .processor import GridSpec, make_sublooks, range_compress
from .scene import PointTarget, SceneSpec, aligned_bit_schedule, num_pulses, synthesize


@dataclass(frozen=True)
class PassResult:
    tx_bits: np.ndarray
    decoded: np.ndarray
    errors: int


def rcs_for_look_snr(radar: RadarParams, geometry: ImagingGeometry, look_snr: float,
                     pulses_per_look: int) -> float:
    """Point-target RCS whose sublook image SNR equals ``look_snr``."""
    unit = single_pulse_snr(radar, replace(geometry, scatter_area=1.0), 1.0)
    return look_snr / (unit * radar.chirp_bandwidth * radar.pulse_duration * pulses_per_look)


def simulate_pass(radar: RadarParams, geometry: ImagingGeometry, bits, ebno_db: float, *,
                  looks_per_symbol: int = 1, seed: int = 0, statistic: str = "coherent",
                  threshold: str = "two-means", upsample: int = 8, clutter_sigma0: float = 0.0,
                  rcs_off_ratio: float = 0.0) -> PassResult:
    """Send ``bits`` over one pass with per-symbol Eb/N0 of ``ebno_db`` and decode them.

    The reflector RCS is set so that each symbol (``looks_per_symbol``
    coherent looks) reaches an on-state image SNR of ``2 * Eb/N0``.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    n_pulses = num_pulses(radar, geometry)
    m = bits.size * looks_per_symbol
    ppl = n_pulses // m
    symbol_snr = 2.0 * float(from_db(ebno_db))
    rcs_on = rcs_for_look_snr(radar, geometry, symbol_snr / looks_per_symbol, ppl)
    schedule = aligned_bit_schedule(bits, radar, geometry, looks_per_symbol)
    target = PointTarget(0.0, 0.0, rcs_on, rcs_on * rcs_off_ratio, schedule)
    extent = (12 * radar.antenna_length, 300.0)
    scene = SceneSpec(geometry, (target,), extent=extent, rng_seed=seed)
    if clutter_sigma0:
        from .scene import ClutterSpec
        scene = replace(scene, clutter=ClutterSpec(clutter_sigma0))
    raw = synthesize(scene, radar)
    rc = range_compress(raw, upsample=upsample)
    grid = GridSpec.centered(nx=3, ny=15, dx=15.0, dy=6.0)
    stack = make_sublooks(rc, m, grid)
    windows = default_windows(grid, 0.0, 0.0, size=3, offset=(0, 6))
    series = measure_coherent(stack, windows) if statistic == "coherent" else measure_scr(stack, windows)
    dec = decide_bits(series, looks_per_symbol=looks_per_symbol, threshold=threshold, min_contrast_db=0.0)
    decoded = dec.bits if dec.modulated else np.zeros_like(bits)
    return PassResult(bits, decoded, int(np.count_nonzero(decoded != bits)))


@dataclass(frozen=True)
class SweepRow:
    ebno_db: float
    bits_per_pass: int
    m: int
    empirical_ber: float
    theoretical_ber: float
    trials: int
    errors: int

    @property
    def standard_error(self) -> float:
        p = self.theoretical_ber
        return math.sqrt(p * (1.0 - p) / self.trials)

    @property
    def z_score(self) -> float:
        return (self.empirical_ber - self.theoretical_ber) / self.standard_error


def theoretical_sweep_ber(ebno_db: float, bits_per_pass: int) -> float:
    """Closed-form OOK BER for a pass whose per-symbol Eb/N0 is ``ebno_db``."""
    snr_on_image = 2.0 * bits_per_pass * float(from_db(ebno_db))
    return ook_ber(snr_on_image, 0.0, bits_per_pass)


def ber_point(radar: RadarParams, geometry: ImagingGeometry, ebno_db: float, bits_per_pass: int,
              trials: int, *, seed: int = 0, looks_per_symbol: int = 1, threads: int = 1,
              point_index: int = 0, **kwargs) -> SweepRow:
    """Run passes until at least ``trials`` bits were sent at one Eb/N0."""
    n_pass = math.ceil(trials / bits_per_pass)

    def one(k: int) -> int:
        rng = np.random.default_rng([int(seed), 7, point_index, k])
        bits = rng.integers(0, 2, bits_per_pass, dtype=np.uint8)
        pass_seed = int(np.random.SeedSequence([int(seed), 8, point_index, k]).generate_state(1, np.uint64)[0])
        return simulate_pass(radar, geometry, bits, ebno_db, looks_per_symbol=looks_per_symbol,
                             seed=pass_seed, **kwargs).errors

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = sum(pool.map(one, range(n_pass)))
    else:
        errors = sum(one(k) for k in range(n_pass))
    n_bits = n_pass * bits_per_pass
    return SweepRow(ebno_db, bits_per_pass, bits_per_pass * looks_per_symbol, errors / n_bits,
                    theoretical_sweep_ber(ebno_db, bits_per_pass), n_bits, errors)


def ber_sweep(radar: RadarParams, geometry: ImagingGeometry, ebno_list_db, bits_per_pass_list,
              trials: int, *, seed: int = 0, threads: int = 1, **kwargs) -> list[SweepRow]:
    rows = []
    index = 0
    for bpp in bits_per_pass_list:
        for ebno in ebno_list_db:
            rows.append(ber_point(radar, geometry, float(ebno), int(bpp), trials, seed=seed,
                                  threads=threads, point_index=index, **kwargs))
            index += 1
    return rows
