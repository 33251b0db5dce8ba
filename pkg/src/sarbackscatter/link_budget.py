"""Closed-form link budget for passive SAR backscatter links.

Covers reflector RCS, SAR resolution and SNR chains, the sublook
trade-offs (timing, resolution, SNR), throughput bounds and the on-off
keying bit error rate.  Every function is pure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erfc

from .exceptions import DomainError, PlanError

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BOLTZMANN = 1.380649e-23  # J/K
FOOT = 0.3048  # m


# ---------------------------------------------------------------------------
# dB helpers (power convention)
# ---------------------------------------------------------------------------

def to_db(x):
    """Linear power ratio to decibels, ``10*log10(x)``."""
    return 10.0 * np.log10(x)


def from_db(x_db):
    """Decibels to linear power ratio."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def q_function(x):
    """Gaussian tail probability Q(x) = 0.5*erfc(x/sqrt(2)).

    Scalars in, float out; arrays in, arrays out.
    """
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(float(x) / math.sqrt(2.0))
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

def _require_positive(**values):
    for name, v in values.items():
        if not (v > 0) or not math.isfinite(v):
            raise DomainError(f"{name} must be a finite positive number, got {v!r}")


@dataclass(frozen=True)
class RadarParams:
    """Transmitter, receiver and platform constants.

    All values in SI units; ``antenna_gain`` is linear (not dB).
    """

    transmit_power: float
    antenna_gain: float
    wavelength: float
    chirp_bandwidth: float
    pulse_duration: float
    prf: float
    antenna_length: float
    platform_velocity: float
    system_noise_temp: float

    def __post_init__(self):
        _require_positive(
            transmit_power=self.transmit_power,
            antenna_gain=self.antenna_gain,
            wavelength=self.wavelength,
            chirp_bandwidth=self.chirp_bandwidth,
            pulse_duration=self.pulse_duration,
            prf=self.prf,
            antenna_length=self.antenna_length,
            platform_velocity=self.platform_velocity,
            system_noise_temp=self.system_noise_temp,
        )
        if self.prf * self.pulse_duration >= 1.0:
            raise DomainError(
                f"duty cycle prf*pulse_duration = {self.prf * self.pulse_duration:.3g} must be < 1"
            )

    @classmethod
    def from_carrier(cls, carrier_frequency: float, **kwargs) -> "RadarParams":
        _require_positive(carrier_frequency=carrier_frequency)
        return cls(wavelength=SPEED_OF_LIGHT / carrier_frequency, **kwargs)

    @property
    def carrier_frequency(self) -> float:
        return SPEED_OF_LIGHT / self.wavelength

    @property
    def chirp_rate(self) -> float:
        return self.chirp_bandwidth / self.pulse_duration


@dataclass(frozen=True)
class ImagingGeometry:
    """Slant range to scene centre, incidence angle (rad) and scattering area (m^2)."""

    slant_range: float
    incidence_angle: float
    scatter_area: float = 1.0

    def __post_init__(self):
        _require_positive(slant_range=self.slant_range, scatter_area=self.scatter_area)
        if not (0.0 < self.incidence_angle < math.pi / 2):
            raise DomainError(f"incidence_angle must lie in (0, pi/2), got {self.incidence_angle!r}")

    @property
    def altitude(self) -> float:
        return self.slant_range * math.cos(self.incidence_angle)

    @property
    def ground_range(self) -> float:
        """Ground distance from the nadir track to the scene centre."""
        return self.slant_range * math.sin(self.incidence_angle)


@dataclass(frozen=True)
class ReflectorGeometry:
    """Square trihedral corner reflector with its two RCS states (m^2)."""

    panel_side: float
    rcs_on: float
    rcs_off: float
    small_panel: bool = False

    def __post_init__(self):
        _require_positive(panel_side=self.panel_side)
        if not (self.rcs_on > self.rcs_off >= 0):
            raise DomainError(f"need rcs_on > rcs_off >= 0, got {self.rcs_on!r}, {self.rcs_off!r}")

    @classmethod
    def from_panel(cls, panel_side: float, wavelength: float, rcs_off: float = 0.0,
                   rcs_on: float | None = None) -> "ReflectorGeometry":
        """Build from panel size; ``rcs_on`` defaults to the trihedral maximum.

        ``small_panel`` is set (and a warning issued) when the panel is
        shorter than ten wavelengths.
        """
        small = panel_side < 10.0 * wavelength
        if small:
            warnings.warn(
                f"panel side {panel_side:.3g} m is below 10 wavelengths ({10 * wavelength:.3g} m)",
                stacklevel=2,
            )
        if rcs_on is None:
            rcs_on = rcs_max(panel_side, wavelength)
        return cls(panel_side=panel_side, rcs_on=rcs_on, rcs_off=rcs_off, small_panel=small)


@dataclass(frozen=True)
class SublookPlan:
    """Partition of an aperture of ``N_A`` pulses into ``m`` equal contiguous blocks.

    ``start_pulse`` is the index of the first retained pulse; the
    ``N_A mod m`` leftover pulses are split between both ends.
    ``delta_t`` is the realised block spacing ``pulses_per_sublook / f_p``,
    identical to ``N_A / (m f_p)`` whenever ``m`` divides ``N_A``.
    """

    num_sublooks: int
    pulses_per_sublook: int
    center_times: tuple[float, ...]
    delta_t: float
    start_pulse: int = 0
    n_azimuth: int | None = None

    def __post_init__(self):
        if self.num_sublooks < 1:
            raise PlanError("num_sublooks must be >= 1")
        if len(self.center_times) != self.num_sublooks:
            raise PlanError("center_times length must equal num_sublooks")

    def block(self, k: int) -> tuple[int, int]:
        """Half-open pulse index interval of look ``k``."""
        if not 0 <= k < self.num_sublooks:
            raise IndexError(k)
        start = self.start_pulse + k * self.pulses_per_sublook
        return start, start + self.pulses_per_sublook

    @property
    def blocks(self) -> list[tuple[int, int]]:
        return [self.block(k) for k in range(self.num_sublooks)]

    @property
    def nominal_delta_t(self) -> float:
        """Sublook spacing if the whole aperture were shared out evenly."""
        used = self.pulses_per_sublook * self.num_sublooks
        total = used if self.n_azimuth is None else self.n_azimuth
        return self.delta_t * total / used


class SampleCounts(NamedTuple):
    n_range: float
    n_azimuth: float
    n_range_int: int
    n_azimuth_int: int


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def rcs_max(panel_side: float, wavelength: float) -> float:
    """Peak RCS (m^2) of a square trihedral: 12*pi*d^4 / lambda^2."""
    _require_positive(panel_side=panel_side, wavelength=wavelength)
    return 12.0 * math.pi * panel_side**4 / wavelength**2


def ground_range_resolution(bandwidth: float, incidence_angle: float) -> float:
    """Ground-range resolution c / (2 B sin(theta_i))."""
    _require_positive(bandwidth=bandwidth)
    if not (0.0 < incidence_angle <= math.pi / 2):
        raise DomainError(f"incidence angle must lie in (0, pi/2], got {incidence_angle!r}")
    return SPEED_OF_LIGHT / (2.0 * bandwidth * math.sin(incidence_angle))


def azimuth_resolution(antenna_length: float, m: int = 1) -> float:
    """Azimuth resolution of an m-look subaperture image, m * L_a / 2."""
    _require_positive(antenna_length=antenna_length)
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m!r}")
    return m * antenna_length / 2.0


def single_pulse_snr(radar: RadarParams, geometry: ImagingGeometry, sigma0: float) -> float:
    """Per-pulse SNR from the radar equation (linear).

    ``geometry.scatter_area * sigma0`` is the RCS of the resolution cell.
    """
    if sigma0 < 0:
        raise DomainError(f"sigma0 must be >= 0, got {sigma0!r}")
    signal = (radar.transmit_power * radar.antenna_gain**2 * geometry.scatter_area * sigma0
              * radar.wavelength**2)
    loss = (4.0 * math.pi) ** 3 * geometry.slant_range**4
    noise = BOLTZMANN * radar.system_noise_temp * radar.chirp_bandwidth
    return signal / (loss * noise)


def _floor_count(x: float) -> int:
    # tolerate representation error such as 499.99999999999994
    nearest = round(x)
    if abs(x - nearest) <= 1e-9 * max(1.0, abs(x)):
        return int(nearest)
    return int(math.floor(x))


def coherent_sample_counts(radar: RadarParams, geometry: ImagingGeometry) -> SampleCounts:
    """Range samples per pulse (B*tau_p) and pulses per aperture (f_p R lambda / (L_a V))."""
    n_r = radar.chirp_bandwidth * radar.pulse_duration
    n_a = (radar.prf * geometry.slant_range * radar.wavelength
           / (radar.antenna_length * radar.platform_velocity))
    return SampleCounts(n_r, n_a, _floor_count(n_r), _floor_count(n_a))


def image_snr(snr_pulse: float, n_range: float, n_azimuth: float, m: int = 1) -> float:
    """SNR of an m-look subaperture image: N_R * N_A * SNR_o / m."""
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m!r}")
    return n_range * n_azimuth * snr_pulse / m


def scr(sigma0_target: float, sigma0_clutter: float) -> float:
    """Signal-to-clutter ratio (linear).  Zero clutter raises (infinite SCR)."""
    if sigma0_clutter == 0:
        raise DomainError("infinite SCR: clutter sigma0 is zero")
    if sigma0_clutter < 0 or sigma0_target < 0:
        raise DomainError("sigma0 values must be non-negative")
    return sigma0_target / sigma0_clutter


def sublook_plan(n_azimuth: int, m: int, prf: float, pass_center_time: float = 0.0) -> SublookPlan:
    """Split ``n_azimuth`` pulses into ``m`` equal looks centred on the pass.

    Pulse ``n`` is taken at ``pass_center_time + (n - (N-1)/2) / prf``.
    """
    n_azimuth = int(n_azimuth)
    m = int(m)
    if m < 1 or m > n_azimuth:
        raise PlanError(f"need 1 <= m <= N_A ({n_azimuth}), got m={m}")
    _require_positive(prf=prf)
    ppl = n_azimuth // m
    remainder = n_azimuth - ppl * m
    start = remainder // 2
    t0 = pass_center_time - (n_azimuth - 1) / 2.0 / prf
    centers = tuple(t0 + (start + k * ppl + (ppl - 1) / 2.0) / prf for k in range(m))
    return SublookPlan(num_sublooks=m, pulses_per_sublook=ppl, center_times=centers,
                       delta_t=ppl / prf, start_pulse=start, n_azimuth=n_azimuth)


def max_bit_rate(prf: float) -> float:
    """Upper bound on bit rate (two pulses per reflector state)."""
    _require_positive(prf=prf)
    return prf / 2.0


def max_throughput(n_azimuth: float) -> float:
    """Upper bound on bits per pass when every pulse pair is a symbol."""
    if n_azimuth < 0:
        raise DomainError("n_azimuth must be >= 0")
    return n_azimuth / 2.0


def ook_ber_sublook(snr_on_look: float, snr_off_look: float) -> float:
    """OOK BER from per-sublook SNRs: Q(sqrt((SNR_on - SNR_off) / 2))."""
    diff = snr_on_look - snr_off_look
    if diff <= 0:
        warnings.warn("on and off states indistinguishable; BER = 0.5", stacklevel=2)
        return 0.5
    return q_function(math.sqrt(diff / 2.0))


def ook_ber(snr_on: float, snr_off: float, m: int = 1, radiometric_floor: float | None = None) -> float:
    """OOK BER from full-aperture image SNRs split into ``m`` looks.

    Q(sqrt((SNR_on - SNR_off) / (2 m))).  ``radiometric_floor`` (linear)
    optionally rejects links whose per-look on-state SNR does not exceed it.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m!r}")
    if snr_off < 0:
        raise DomainError("snr_off must be >= 0")
    if radiometric_floor is not None and snr_on / m <= radiometric_floor:
        raise DomainError(
            f"per-look on-state SNR {snr_on / m:.3g} does not exceed radiometric floor {radiometric_floor:.3g}"
        )
    diff = snr_on - snr_off
    if diff <= 0:
        warnings.warn("on and off states indistinguishable; BER = 0.5", stacklevel=2)
        return 0.5
    return q_function(math.sqrt(diff / (2.0 * m)))


def ebno_from_power_contrast(contrast_db: float) -> float:
    """Per-bit Eb/N0 (dB) when the on/off power difference is ``contrast_db``."""
    return float(to_db(from_db(contrast_db) / 2.0))


def pass_ber(ebno_pass_db: float, bits_per_pass: int) -> float:
    """BER when a pass-level Eb/N0 (half the full-image on/off SNR gap) is shared by ``bits_per_pass`` looks."""
    if bits_per_pass < 1:
        raise DomainError("bits_per_pass must be >= 1")
    return q_function(math.sqrt(float(from_db(ebno_pass_db)) / bits_per_pass))
