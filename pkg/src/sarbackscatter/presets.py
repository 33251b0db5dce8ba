"""Ready-made radar and geometry parameter sets."""

import math

from .link_budget import SPEED_OF_LIGHT, ImagingGeometry, RadarParams

SENTINEL_CARRIER = 5.405e9


def sentinel_like_radar(prf: float = 1717.0) -> RadarParams:
    """C-band parameters of the order of a Sentinel-1 IW acquisition."""
    return RadarParams(
        transmit_power=4368.0,
        antenna_gain=10 ** 4.6,
        wavelength=SPEED_OF_LIGHT / SENTINEL_CARRIER,
        chirp_bandwidth=56.5e6,
        pulse_duration=52.4e-6,
        prf=prf,
        antenna_length=12.3,
        platform_velocity=7600.0,
        system_noise_temp=550.0,
    )


def sentinel_like_geometry() -> ImagingGeometry:
    return ImagingGeometry(slant_range=850e3, incidence_angle=math.radians(39.0), scatter_area=1.0)


def desk_radar(chirp_bandwidth: float = 50e6, pulse_duration: float = 20e-6) -> RadarParams:
    """Desk-scale C-band radar giving 512 pulses per aperture with :func:`desk_geometry`."""
    return RadarParams(
        transmit_power=4000.0,
        antenna_gain=10 ** 4.6,
        wavelength=SPEED_OF_LIGHT / SENTINEL_CARRIER,
        chirp_bandwidth=chirp_bandwidth,
        pulse_duration=pulse_duration,
        prf=1987.0,
        antenna_length=12.3,
        platform_velocity=7000.0,
        system_noise_temp=500.0,
    )


def desk_geometry() -> ImagingGeometry:
    return ImagingGeometry(slant_range=400e3, incidence_angle=math.radians(35.0), scatter_area=1.0)
