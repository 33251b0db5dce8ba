"""Binary and text artifacts exchanged between pipeline stages.

SARL raw-echo file (little-endian)::

    magic        4s   b"SARL"
    version      u32  1
    num_pulses   u64
    samples      u64  samples per pulse
    prf, sample_rate, chirp_bandwidth, pulse_duration, wavelength,
    range_window_start, platform_velocity, slant_range      8 x f64
    payload      num_pulses * samples * 2 x f32, pulse-major, I then Q
    meta_len     u64
    meta         meta_len bytes of UTF-8 JSON (radar, geometry, pulse times, truth)

SARS sublook-stack file (little-endian)::

    magic        4s   b"SARS"
    version      u32  1
    m, nx, ny    3 x u64
    x0, y0, dx, dy                                          4 x f64
    center_times m x f64
    payload      m * nx * ny * 2 x f32, look-major then azimuth then range, I then Q
    meta_len     u64
    meta         UTF-8 JSON (radar, geometry, pulse ranges, truth)
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .exceptions import FormatError
from .link_budget import ImagingGeometry, RadarParams
from .processor import GridSpec, SublookStack
from .scene import RawEchoSet, SceneSpec, geometry_to_dict, radar_to_dict

SARL_MAGIC = b"SARL"
SARS_MAGIC = b"SARS"
FORMAT_VERSION = 1

_SARL_HEADER = struct.Struct("<4sIQQ8d")
_SARS_HEADER = struct.Struct("<4sIQQQ4d")
_LEN = struct.Struct("<Q")


def _read_exact(fh, n: int, what: str) -> bytes:
    data = fh.read(n)
    if len(data) != n:
        raise FormatError(f"truncated file: expected {n} bytes of {what}, got {len(data)}")
    return data


def _check_magic(magic: bytes, version: int, expected: bytes, path) -> None:
    if magic != expected:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {expected!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version} (this build reads {FORMAT_VERSION})")


def _write_meta(fh, meta: dict) -> None:
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    fh.write(_LEN.pack(len(blob)))
    fh.write(blob)


def _read_meta(fh) -> dict:
    (n,) = _LEN.unpack(_read_exact(fh, _LEN.size, "metadata length"))
    try:
        return json.loads(_read_exact(fh, n, "metadata").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"corrupt metadata block: {exc}") from exc


def _complex_to_f32(z: np.ndarray) -> bytes:
    return np.ascontiguousarray(z, dtype=np.complex64).view("<f4").tobytes()


def _f32_to_complex(buf: bytes, shape) -> np.ndarray:
    return np.frombuffer(buf, dtype="<f4").view(np.complex64).reshape(shape).copy()


# ---------------------------------------------------------------------------
# SARL raw echoes
# ---------------------------------------------------------------------------

def write_sarl(path, raw: RawEchoSet) -> Path:
    path = Path(path)
    r, g = raw.radar, raw.geometry
    header = _SARL_HEADER.pack(
        SARL_MAGIC, FORMAT_VERSION, raw.num_pulses, raw.samples_per_pulse,
        r.prf, raw.sample_rate, r.chirp_bandwidth, r.pulse_duration, r.wavelength,
        raw.range_window_start, r.platform_velocity, g.slant_range,
    )
    meta = {
        "radar": radar_to_dict(r),
        "geometry": geometry_to_dict(g),
        "pulse_times": [float(t) for t in raw.pulse_times],
        "pass_center_time": raw.pass_center_time,
        "truth": raw.truth.to_dict() if raw.truth is not None else None,
    }
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_complex_to_f32(raw.samples))
        _write_meta(fh, meta)
    return path


def read_sarl(path) -> RawEchoSet:
    path = Path(path)
    with open(path, "rb") as fh:
        head = _read_exact(fh, _SARL_HEADER.size, "SARL header")
        magic, version, n_p, n_s, *floats = _SARL_HEADER.unpack(head)
        _check_magic(magic, version, SARL_MAGIC, path)
        prf, fs, bw, tau, lam, start, vel, slant = floats
        samples = _f32_to_complex(_read_exact(fh, n_p * n_s * 8, "I/Q payload"), (n_p, n_s))
        meta = _read_meta(fh)
    try:
        radar = RadarParams(**meta["radar"])
        geometry = ImagingGeometry(**meta["geometry"])
        truth = SceneSpec.from_dict(meta["truth"]) if meta.get("truth") else None
        times = np.asarray(meta["pulse_times"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: incomplete metadata ({exc})") from exc
    fixed = (radar.prf, radar.chirp_bandwidth, radar.pulse_duration, radar.wavelength,
             radar.platform_velocity, geometry.slant_range)
    if fixed != (prf, bw, tau, lam, vel, slant):
        raise FormatError(f"{path}: header and metadata disagree on radar/geometry parameters")
    return RawEchoSet(samples=samples, pulse_times=times, range_window_start=start, sample_rate=fs,
                      radar=radar, geometry=geometry, truth=truth,
                      pass_center_time=float(meta.get("pass_center_time", 0.0)))


# ---------------------------------------------------------------------------
# SARS sublook stacks
# ---------------------------------------------------------------------------

def write_stack(path, stack: SublookStack) -> Path:
    path = Path(path)
    gr = stack.grid
    header = _SARS_HEADER.pack(SARS_MAGIC, FORMAT_VERSION, stack.m, gr.nx, gr.ny, gr.x0, gr.y0, gr.dx, gr.dy)
    meta = {
        "radar": radar_to_dict(stack.radar),
        "geometry": geometry_to_dict(stack.geometry),
        "pulse_ranges": [list(map(int, b)) for b in stack.pulse_ranges],
        "truth": stack.truth.to_dict() if stack.truth is not None else None,
    }
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.asarray(stack.center_times, dtype="<f8").tobytes())
        fh.write(_complex_to_f32(stack.looks))
        _write_meta(fh, meta)
    return path


def read_stack(path) -> SublookStack:
    path = Path(path)
    with open(path, "rb") as fh:
        head = _read_exact(fh, _SARS_HEADER.size, "SARS header")
        magic, version, m, nx, ny, x0, y0, dx, dy = _SARS_HEADER.unpack(head)
        _check_magic(magic, version, SARS_MAGIC, path)
        centers = np.frombuffer(_read_exact(fh, 8 * m, "center times"), dtype="<f8").copy()
        looks = _f32_to_complex(_read_exact(fh, m * nx * ny * 8, "image payload"), (m, nx, ny))
        meta = _read_meta(fh)
    try:
        return SublookStack(
            looks=looks,
            grid=GridSpec(x0, y0, dx, dy, int(nx), int(ny)),
            center_times=centers,
            pulse_ranges=tuple(tuple(b) for b in meta["pulse_ranges"]),
            radar=RadarParams(**meta["radar"]),
            geometry=ImagingGeometry(**meta["geometry"]),
            truth=SceneSpec.from_dict(meta["truth"]) if meta.get("truth") else None,
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: incomplete metadata ({exc})") from exc


def write_power_csv(path, stack: SublookStack, normalize: bool = True) -> Path:
    """Long-format per-look power grid: look, ix, iy, x_m, y_m, power."""
    path = Path(path)
    power = stack.power(normalize=normalize)
    xs, ys = stack.grid.x, stack.grid.y
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["look", "ix", "iy", "x_m", "y_m", "power"])
        for k in range(stack.m):
            for ix in range(stack.grid.nx):
                for iy in range(stack.grid.ny):
                    w.writerow([k, ix, iy, repr(float(xs[ix])), repr(float(ys[iy])),
                                repr(float(power[k, ix, iy]))])
    return path


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

def write_json(path, data: dict) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_link_report(json_path, csv_path, report) -> None:
    """Structured report plus a per-sublook CSV (sublook_index, center_time_s, scr_db, bit)."""
    write_json(json_path, report.to_dict())
    bits = report.look_bits()
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sublook_index", "center_time_s", "scr_db", "bit"])
        for k, (t, v) in enumerate(zip(report.scr_series.center_times, report.scr_series.values)):
            w.writerow([k, repr(float(t)), repr(float(v)), "" if bits[k] < 0 else int(bits[k])])


def write_rows_csv(path, header, rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path
