"""Range compression, time-domain backprojection and sublook generation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft

from .exceptions import AliasingError, DomainError, PlanError
from .link_budget import SPEED_OF_LIGHT, ImagingGeometry, RadarParams, sublook_plan
from .scene import RawEchoSet, SceneSpec, chirp_replica, slant_range_history


@dataclass(frozen=True)
class GridSpec:
    """Regular ground grid; (x0, y0) is the centre of pixel (0, 0).

    Axis 0 of an image is azimuth (x), axis 1 ground range (y).
    """

    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.dx <= 0 or self.dy <= 0 or self.nx < 1 or self.ny < 1:
            raise DomainError("grid spacing must be positive and the grid non-empty")

    @classmethod
    def centered(cls, nx: int = 64, ny: int = 64, dx: float = 15.0, dy: float = 6.0,
                 center: tuple[float, float] = (0.0, 0.0)) -> "GridSpec":
        """Grid whose pixel (nx//2, ny//2) sits exactly on ``center``."""
        return cls(x0=center[0] - (nx // 2) * dx, y0=center[1] - (ny // 2) * dy,
                   dx=dx, dy=dy, nx=int(nx), ny=int(ny))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.dy * np.arange(self.ny)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    def pixel_of(self, x: float, y: float) -> tuple[int, int]:
        return int(round((x - self.x0) / self.dx)), int(round((y - self.y0) / self.dy))

    def shifted(self, kx: int = 0, ky: int = 0) -> "GridSpec":
        return GridSpec(self.x0 + kx * self.dx, self.y0 + ky * self.dy, self.dx, self.dy, self.nx, self.ny)

    def to_dict(self) -> dict:
        return {"x0": self.x0, "y0": self.y0, "dx": self.dx, "dy": self.dy, "nx": self.nx, "ny": self.ny}


@dataclass(frozen=True, eq=False)
class RangeCompressed:
    """Matched-filtered pulses; bin ``i`` is slant range ``range_start + i*bin_spacing``."""

    samples: np.ndarray
    bin_spacing: float
    range_start: float
    sample_rate: float
    upsample: int
    pulse_times: np.ndarray
    radar: RadarParams
    geometry: ImagingGeometry
    truth: SceneSpec | None = None
    pass_center_time: float = 0.0

    @property
    def num_pulses(self) -> int:
        return self.samples.shape[0]

    @property
    def num_bins(self) -> int:
        return self.samples.shape[1]

    @property
    def ranges(self) -> np.ndarray:
        return self.range_start + self.bin_spacing * np.arange(self.num_bins)


@dataclass(frozen=True, eq=False)
class SublookStack:
    """``m`` complex images on one grid, formed from disjoint pulse blocks.

    Images are unnormalised coherent sums, so the looks add up to the
    full-aperture image over the same pulses.
    """

    looks: np.ndarray
    grid: GridSpec
    center_times: np.ndarray
    pulse_ranges: tuple[tuple[int, int], ...]
    radar: RadarParams
    geometry: ImagingGeometry
    truth: SceneSpec | None = None

    @property
    def m(self) -> int:
        return self.looks.shape[0]

    @property
    def pulses_per_look(self) -> int:
        a, b = self.pulse_ranges[0]
        return b - a

    def power(self, normalize: bool = True) -> np.ndarray:
        """Per-look pixel power; with ``normalize`` divided by pulses per look.

        The normalised power keeps receiver noise at a constant level, so a
        point target's value tracks its sublook SNR (falls as 1/m).
        """
        p = np.abs(self.looks) ** 2
        return p / self.pulses_per_look if normalize else p

    def coherent_sum(self) -> np.ndarray:
        return self.looks.sum(axis=0)


def range_compress(raw: RawEchoSet, upsample: int = 1, chunk: int = 64) -> RangeCompressed:
    """Correlate every pulse with the transmitted chirp (FFT based).

    Only lags where the replica fully overlaps the window are kept.
    ``upsample > 1`` interpolates the compressed pulses by zero padding
    their spectrum, which shrinks the bin spacing by the same factor.
    """
    radar = raw.radar
    fs = raw.sample_rate
    if fs < radar.chirp_bandwidth:
        raise AliasingError(f"sample rate {fs:.4g} Hz below chirp bandwidth {radar.chirp_bandwidth:.4g} Hz")
    U = int(upsample)
    if U < 1:
        raise DomainError("upsample must be >= 1")
    replica = chirp_replica(radar, fs)
    n = raw.samples_per_pulse
    n_valid = n - replica.size + 1
    if n_valid < 1:
        raise DomainError("range window shorter than the pulse")
    nfft = sp_fft.next_fast_len(n + replica.size)
    ref = np.conj(sp_fft.fft(replica, nfft))
    out = np.empty((raw.num_pulses, U * n_valid), dtype=np.complex128)
    half = nfft // 2
    for lo in range(0, raw.num_pulses, chunk):
        hi = min(lo + chunk, raw.num_pulses)
        spec = sp_fft.fft(raw.samples[lo:hi].astype(np.complex128), nfft, axis=1) * ref
        if U == 1:
            out[lo:hi] = sp_fft.ifft(spec, axis=1)[:, :n_valid]
            continue
        padded = np.zeros((hi - lo, U * nfft), dtype=np.complex128)
        padded[:, :half] = spec[:, :half]
        padded[:, U * nfft - (nfft - half):] = spec[:, half:]
        if nfft % 2 == 0:
            # split the Nyquist bin between both ends
            padded[:, half] = 0.5 * spec[:, half]
            padded[:, U * nfft - half] = 0.5 * spec[:, half]
        out[lo:hi] = U * sp_fft.ifft(padded, axis=1)[:, :U * n_valid]
    return RangeCompressed(
        samples=out,
        bin_spacing=SPEED_OF_LIGHT / (2.0 * U * fs),
        range_start=raw.range_window_start,
        sample_rate=U * fs,
        upsample=U,
        pulse_times=np.asarray(raw.pulse_times),
        radar=radar,
        geometry=raw.geometry,
        truth=raw.truth,
        pass_center_time=raw.pass_center_time,
    )


def backproject(rc: RangeCompressed, grid: GridSpec, pulse_range: tuple[int, int] | None = None,
                chunk: int = 32) -> np.ndarray:
    """Time-domain backprojection of pulses ``pulse_range`` onto ``grid``.

    Each pixel accumulates the compressed sample at its two-way delay
    (linear interpolation between bins) times exp(+j 4 pi R / lambda).
    Returns an ``(nx, ny)`` complex array.
    """
    a, b = (0, rc.num_pulses) if pulse_range is None else (int(pulse_range[0]), int(pulse_range[1]))
    if not (0 <= a < b <= rc.num_pulses):
        raise DomainError(f"pulse_range ({a}, {b}) is empty or outside [0, {rc.num_pulses})")
    g = rc.geometry
    lam = rc.radar.wavelength
    xs, ys = grid.x, grid.y
    r0_sq = (g.ground_range + ys) ** 2 + g.altitude**2
    platform_x = rc.radar.platform_velocity * (rc.pulse_times - rc.pass_center_time)
    nb = rc.num_bins
    image = np.zeros(grid.shape, dtype=np.complex128)
    for lo in range(a, b, chunk):
        hi = min(lo + chunk, b)
        along = platform_x[lo:hi, None] - xs[None, :]
        r = np.sqrt(r0_sq[None, None, :] + (along**2)[:, :, None])
        f = (r - rc.range_start) / rc.bin_spacing
        i0 = np.floor(f).astype(np.int64)
        w = f - i0
        valid = (i0 >= 0) & (i0 < nb - 1)
        i0 = np.clip(i0, 0, nb - 2)
        rows = rc.samples[lo:hi].reshape(hi - lo, nb)
        idx = i0.reshape(hi - lo, -1)
        v0 = np.take_along_axis(rows, idx, axis=1).reshape(r.shape)
        v1 = np.take_along_axis(rows, idx + 1, axis=1).reshape(r.shape)
        val = (v0 + w * (v1 - v0)) * np.exp(4j * np.pi * r / lam)
        image += np.where(valid, val, 0.0).sum(axis=0)
    return image


def max_sublooks(num_pulses: int) -> int:
    return num_pulses // 2


def make_sublooks(rc: RangeCompressed, m: int, grid: GridSpec, threads: int = 1) -> SublookStack:
    """Backproject ``m`` equal contiguous pulse blocks onto a shared grid."""
    m = int(m)
    limit = max_sublooks(rc.num_pulses)
    if m < 1 or m > limit:
        raise PlanError(f"m={m} is infeasible for {rc.num_pulses} pulses; maximum feasible m is {limit}")
    plan = sublook_plan(rc.num_pulses, m, rc.radar.prf, rc.pass_center_time)
    blocks = plan.blocks
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            images = list(pool.map(lambda blk: backproject(rc, grid, blk), blocks))
    else:
        images = [backproject(rc, grid, blk) for blk in blocks]
    centers = np.array([rc.pulse_times[a:b].mean() for a, b in blocks])
    return SublookStack(looks=np.stack(images), grid=grid, center_times=centers,
                        pulse_ranges=tuple(blocks), radar=rc.radar, geometry=rc.geometry, truth=rc.truth)


def impulse_width(profile, spacing: float, level_db: float = -3.0) -> float:
    """Width of the main lobe of a 1-D cut at ``level_db`` below its peak.

    The peak level is refined by a parabola through the three samples
    around the maximum; crossings are linearly interpolated in power.
    """
    p = np.abs(np.asarray(profile)) ** 2
    k = int(np.argmax(p))
    if k == 0 or k == p.size - 1:
        raise DomainError("peak on the edge of the profile; widen the cut")
    y0, y1, y2 = p[k - 1], p[k], p[k + 1]
    denom = y0 - 2 * y1 + y2
    offset = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
    peak = y1 - 0.25 * (y0 - y2) * offset
    level = peak * 10.0 ** (level_db / 10.0)

    def crossing(step: int) -> float:
        i = k
        while 0 <= i + step < p.size and p[i + step] > level:
            i += step
        j = i + step
        if not 0 <= j < p.size:
            raise DomainError("main lobe does not fall below the level inside the profile")
        return i + step * (p[i] - level) / (p[i] - p[j])

    return (crossing(+1) - crossing(-1)) * spacing
