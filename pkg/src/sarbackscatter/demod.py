"""Per-sublook SCR measurement, thresholding and bit decisions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .link_budget import ImagingGeometry, RadarParams, ook_ber, single_pulse_snr
from .processor import GridSpec, SublookStack


@dataclass(frozen=True)
class PixelWindow:
    """Rectangle of pixels starting at (ix, iy) spanning nx x ny."""

    ix: int
    iy: int
    nx: int = 3
    ny: int = 3

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise DomainError("window must contain at least one pixel")

    @classmethod
    def around(cls, ix: int, iy: int, nx: int = 3, ny: int = 3) -> "PixelWindow":
        return cls(ix - nx // 2, iy - ny // 2, nx, ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def center(self) -> tuple[int, int]:
        return self.ix + self.nx // 2, self.iy + self.ny // 2

    @property
    def slices(self) -> tuple[slice, slice]:
        return slice(self.ix, self.ix + self.nx), slice(self.iy, self.iy + self.ny)

    def inside(self, grid: GridSpec) -> bool:
        return self.ix >= 0 and self.iy >= 0 and self.ix + self.nx <= grid.nx and self.iy + self.ny <= grid.ny

    def overlaps(self, other: "PixelWindow") -> bool:
        return not (self.ix + self.nx <= other.ix or other.ix + other.nx <= self.ix
                    or self.iy + self.ny <= other.iy or other.iy + other.ny <= self.iy)

    def to_list(self) -> list[int]:
        return [self.ix, self.iy, self.nx, self.ny]


@dataclass(frozen=True)
class MeasurementWindows:
    """Reflector and clutter windows with equal pixel counts."""

    reflector: PixelWindow
    clutter: PixelWindow

    def __post_init__(self):
        if self.reflector.size != self.clutter.size:
            raise DomainError(
                f"reflector ({self.reflector.size} px) and clutter ({self.clutter.size} px) windows differ in size"
            )
        if self.reflector.overlaps(self.clutter):
            raise DomainError("reflector and clutter windows overlap")

    def check(self, grid: GridSpec) -> None:
        for name, w in (("reflector", self.reflector), ("clutter", self.clutter)):
            if not w.inside(grid):
                raise DomainError(f"{name} window {w.to_list()} lies outside the {grid.nx}x{grid.ny} grid")


def default_windows(grid: GridSpec, x: float, y: float, size: int = 3,
                    offset: tuple[int, int] | None = None) -> MeasurementWindows:
    """``size``-square windows: one on the pixel nearest (x, y), one displaced in range.

    The clutter window sits ``offset`` pixels away (default: far enough in
    ground range to clear the reflector window, toward the larger margin).
    """
    ix, iy = grid.pixel_of(x, y)
    refl = PixelWindow.around(ix, iy, size, size)
    if offset is None:
        step = 2 * size
        dy = step if iy + step + size // 2 < grid.ny else -step
        offset = (0, dy)
    clut = PixelWindow(refl.ix + offset[0], refl.iy + offset[1], size, size)
    wins = MeasurementWindows(refl, clut)
    wins.check(grid)
    return wins


@dataclass(frozen=True)
class ScrSeries:
    """One value per sublook, ordered by centre time.

    ``units == "dB"`` for power SCR; ``"linear"`` for the coherent in-phase
    amplitude statistic.
    """

    values: np.ndarray
    center_times: np.ndarray
    units: str = "dB"

    def __post_init__(self):
        if len(self.values) != len(self.center_times):
            raise DomainError("values and center_times differ in length")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("SCR series contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)


def measure_scr(stack: SublookStack, windows: MeasurementWindows) -> ScrSeries:
    """Per-look SCR in dB: mean reflector-window power over mean clutter-window power."""
    windows.check(stack.grid)
    power = np.abs(stack.looks) ** 2
    rs, cs = windows.reflector.slices, windows.clutter.slices
    num = power[:, rs[0], rs[1]].mean(axis=(1, 2))
    den = power[:, cs[0], cs[1]].mean(axis=(1, 2))
    if np.any(den <= 0):
        raise DomainError("clutter window has zero power in at least one look")
    return ScrSeries(10.0 * np.log10(num / den), np.asarray(stack.center_times), "dB")


def measure_coherent(stack: SublookStack, windows: MeasurementWindows) -> ScrSeries:
    """In-phase amplitude of the reflector pixel in each look.

    The reflector phase is estimated from the sum over looks; values are
    scaled by the clutter-window RMS pooled over all looks (clutter is
    treated as constant across looks).
    """
    windows.check(stack.grid)
    ix, iy = windows.reflector.center
    z = stack.looks[:, ix, iy]
    phase = np.angle(z.sum())
    cs = windows.clutter.slices
    ref = math.sqrt(float(np.mean(np.abs(stack.looks[:, cs[0], cs[1]]) ** 2)))
    if ref == 0:
        raise DomainError("clutter window has zero power")
    return ScrSeries(np.real(z * np.exp(-1j * phase)) / ref, np.asarray(stack.center_times), "linear")


@dataclass(frozen=True)
class BitDecision:
    modulated: bool
    threshold: float
    bits: np.ndarray
    symbol_values: np.ndarray
    contrast_db: float
    symbol_map: np.ndarray = field(repr=False, default=None)


def default_symbol_map(m: int, looks_per_symbol: int = 2) -> np.ndarray:
    """Consecutive groups of ``looks_per_symbol`` looks; leftover looks map to -1."""
    if looks_per_symbol < 1:
        raise DomainError("looks_per_symbol must be >= 1")
    idx = np.arange(m) // looks_per_symbol
    idx[idx >= m // looks_per_symbol] = -1
    return idx


def _contrast_db(values: np.ndarray, units: str) -> float:
    hi, lo = float(np.max(values)), float(np.min(values))
    if units == "dB":
        return hi - lo
    if lo <= 0:
        return math.inf
    return 20.0 * math.log10(hi / lo)


def two_means_threshold(values, max_iter: int = 100) -> float:
    """Midpoint between the means of a two-cluster split (1-D Lloyd iteration)."""
    v = np.sort(np.asarray(values, dtype=float))
    t = 0.5 * (v[0] + v[-1])
    for _ in range(max_iter):
        lo, hi = v[v <= t], v[v > t]
        if lo.size == 0 or hi.size == 0:
            break
        new = 0.5 * (lo.mean() + hi.mean())
        if new == t:
            break
        t = new
    return float(t)


def decide_bits(series: ScrSeries, symbol_map=None, looks_per_symbol: int = 2,
                threshold: str = "extremes", min_contrast_db: float = 1.0) -> BitDecision:
    """Threshold a sublook series into bits.

    ``threshold="extremes"`` uses the midpoint between the smallest and
    largest look values; ``"two-means"`` the midpoint between the two
    cluster means of the per-symbol values.  A symbol is 1 when the mean of
    its looks exceeds the threshold.  A series whose contrast is below
    ``min_contrast_db`` is reported as unmodulated with no bits.
    """
    values = np.asarray(series.values, dtype=float)
    if values.size < 2:
        raise DomainError("need at least two sublooks to decide bits")
    smap = default_symbol_map(values.size, looks_per_symbol) if symbol_map is None else np.asarray(symbol_map)
    if smap.shape != values.shape:
        raise DomainError("symbol_map must assign every sublook (use -1 for unused looks)")
    n_sym = int(smap.max()) + 1
    if n_sym < 1:
        raise DomainError("symbol_map assigns no looks")
    sym = np.array([values[smap == s].mean() for s in range(n_sym)])
    contrast = _contrast_db(values, series.units)
    if contrast < min_contrast_db:
        return BitDecision(False, math.nan, np.empty(0, dtype=np.uint8), sym, contrast, smap)
    if threshold == "extremes":
        thr = 0.5 * (values.max() + values.min())
    elif threshold == "two-means":
        thr = two_means_threshold(sym)
    else:
        raise DomainError(f"unknown threshold rule {threshold!r}")
    return BitDecision(True, float(thr), (sym > thr).astype(np.uint8), sym, contrast, smap)


def empirical_ber(decoded, truth) -> float:
    """Fraction of positions where ``decoded`` and ``truth`` differ."""
    d = np.asarray(decoded, dtype=np.int64)
    t = np.asarray(truth, dtype=np.int64)
    if d.shape != t.shape:
        raise DomainError(f"decoded ({d.size}) and truth ({t.size}) lengths differ")
    if d.size == 0:
        raise DomainError("cannot compute BER of an empty stream")
    return float(np.count_nonzero(d != t)) / d.size


def predicted_image_snr(radar: RadarParams, geometry: ImagingGeometry, rcs: float,
                        n_pulses: int) -> float:
    """Full-aperture image SNR of a point target of ``rcs`` over ``n_pulses`` pulses."""
    snr_o = single_pulse_snr(radar, geometry, rcs / geometry.scatter_area)
    return radar.chirp_bandwidth * radar.pulse_duration * n_pulses * snr_o


@dataclass
class LinkReport:
    scr_series: ScrSeries
    threshold_db: float
    decoded_bits: np.ndarray
    modulated: bool
    tx_bits: np.ndarray | None = None
    empirical_ber: float | None = None
    theoretical_ber: float | None = None
    looks_per_symbol: int = 2
    symbol_map: np.ndarray | None = None

    def look_bits(self) -> np.ndarray:
        """Decoded bit per sublook (-1 for unassigned looks or when unmodulated)."""
        out = np.full(len(self.scr_series), -1, dtype=np.int64)
        if self.modulated and self.symbol_map is not None:
            used = self.symbol_map >= 0
            out[used] = self.decoded_bits[self.symbol_map[used]]
        return out

    def to_dict(self) -> dict:
        return {
            "modulated": self.modulated,
            "status": "ok" if self.modulated else "no modulation detected",
            "units": self.scr_series.units,
            "scr_series": [float(v) for v in self.scr_series.values],
            "center_times_s": [float(t) for t in self.scr_series.center_times],
            "threshold": None if not self.modulated else float(self.threshold_db),
            "looks_per_symbol": self.looks_per_symbol,
            "decoded_bits": "".join(str(int(b)) for b in self.decoded_bits),
            "tx_bits": None if self.tx_bits is None else "".join(str(int(b)) for b in self.tx_bits),
            "empirical_ber": self.empirical_ber,
            "theoretical_ber": self.theoretical_ber,
        }


def build_link_report(stack: SublookStack, windows: MeasurementWindows, *, tx_bits=None,
                      looks_per_symbol: int = 2, statistic: str = "scr_db",
                      threshold: str = "extremes", min_contrast_db: float = 1.0,
                      target_rcs: tuple[float, float] | None = None) -> LinkReport:
    """Measure, decide and score one stack.

    ``target_rcs`` = (rcs_on, rcs_off) enables the theoretical BER column,
    evaluated by :func:`ook_ber` with m equal to the number of symbols.
    """
    if statistic == "scr_db":
        series = measure_scr(stack, windows)
    elif statistic == "coherent":
        series = measure_coherent(stack, windows)
    else:
        raise DomainError(f"unknown statistic {statistic!r}")
    dec = decide_bits(series, looks_per_symbol=looks_per_symbol, threshold=threshold,
                      min_contrast_db=min_contrast_db)
    report = LinkReport(series, dec.threshold, dec.bits, dec.modulated, looks_per_symbol=looks_per_symbol,
                        symbol_map=dec.symbol_map)
    if tx_bits is not None:
        report.tx_bits = np.asarray(tx_bits, dtype=np.uint8)
        if dec.modulated:
            n = min(report.tx_bits.size, dec.bits.size)
            errors = np.count_nonzero(dec.bits[:n] != report.tx_bits[:n]) + abs(report.tx_bits.size - dec.bits.size)
            report.empirical_ber = errors / max(report.tx_bits.size, dec.bits.size)
    if target_rcs is not None:
        n_pulses = stack.pulses_per_look * stack.m
        snr_on = predicted_image_snr(stack.radar, stack.geometry, target_rcs[0], n_pulses)
        snr_off = predicted_image_snr(stack.radar, stack.geometry, target_rcs[1], n_pulses)
        n_symbols = max(1, stack.m // looks_per_symbol)
        report.theoretical_ber = ook_ber(snr_on, snr_off, n_symbols)
    return report
