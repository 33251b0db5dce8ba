"""Scenario configuration files (YAML, SI units, unknown keys rejected).

Top-level sections: ``seed`` (required), ``radar``, ``geometry``, ``scene``,
``simulation``, ``processing``, ``budget`` and ``sweep``.  See
``configs/`` for annotated examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .demod import MeasurementWindows, PixelWindow, default_windows
from .exceptions import ConfigError, DomainError
from .link_budget import SPEED_OF_LIGHT, ImagingGeometry, RadarParams, rcs_max
from .presets import desk_geometry, desk_radar, sentinel_like_geometry, sentinel_like_radar
from .processor import GridSpec
from .scene import (
    ClutterSpec,
    ModulationSchedule,
    PointTarget,
    SceneSpec,
    aligned_bit_schedule,
    aligned_square_wave,
    num_pulses,
)

RADAR_PRESETS = {"desk": desk_radar, "sentinel_like": sentinel_like_radar}
GEOMETRY_PRESETS = {"desk": desk_geometry, "sentinel_like": sentinel_like_geometry}

_RADAR_KEYS = set(RadarParams.__dataclass_fields__) | {"preset", "carrier_frequency"}
_GEOMETRY_KEYS = {"preset", "slant_range", "incidence_angle", "incidence_angle_deg", "scatter_area"}
_TOP_KEYS = {"seed", "radar", "geometry", "scene", "simulation", "processing", "budget", "sweep"}
_SCENE_KEYS = {"extent", "pass_center_time", "targets", "clutter"}
_TARGET_KEYS = {"x", "y", "rcs_on", "panel_side", "rcs_off", "schedule"}
_SCHEDULE_KEYS = {"kind", "period", "phase", "bits", "symbol_duration", "start_offset", "align_to_sublooks"}
_CLUTTER_KEYS = {"sigma0", "cell_size"}
_SIM_KEYS = {"sample_rate", "noise", "clutter_oversample"}
_PROC_KEYS = {"m", "looks_per_symbol", "upsample", "grid", "windows", "statistic", "threshold",
              "min_contrast_db", "target"}
_GRID_KEYS = {"nx", "ny", "dx", "dy", "center"}
_WINDOW_KEYS = {"size", "offset", "reflector", "clutter"}
_BUDGET_KEYS = {"m_list", "prf_list"}
_SWEEP_KEYS = {"ebno_list_db", "bits_per_pass_list", "trials", "looks_per_symbol", "statistic",
               "threshold", "upsample"}


def _check_keys(section: str, data, allowed: set) -> dict:
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"[{section}] must be a mapping, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"[{section}] unknown key(s): {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")
    return dict(data)


@dataclass(frozen=True)
class ProcessingConfig:
    m: int | None = None
    looks_per_symbol: int = 2
    upsample: int = 8
    grid: dict = field(default_factory=dict)
    windows: dict = field(default_factory=dict)
    statistic: str = "scr_db"
    threshold: str = "extremes"
    min_contrast_db: float = 1.0
    target: int = 0


@dataclass(frozen=True)
class SimulationConfig:
    sample_rate: float | None = None
    noise: bool = True
    clutter_oversample: int = 8


@dataclass(frozen=True)
class BudgetConfig:
    m_list: tuple[int, ...] = (1, 2, 4, 8, 16, 32, 64, 128)
    prf_list: tuple[float, ...] = (1000.0, 1500.0, 2000.0, 2500.0, 3000.0)


@dataclass(frozen=True)
class SweepConfig:
    ebno_list_db: tuple[float, ...] = (3.0, 5.0, 7.0, 9.0, 11.0)
    bits_per_pass_list: tuple[int, ...] = (256,)
    trials: int = 10_000
    looks_per_symbol: int = 1
    statistic: str = "coherent"
    threshold: str = "two-means"
    upsample: int = 8


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    radar: RadarParams
    geometry: ImagingGeometry
    scene: SceneSpec
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    processing: ProcessingConfig = field(default_factory=ProcessingConfig)
    budget: BudgetConfig = field(default_factory=BudgetConfig)
    sweep: SweepConfig | None = None
    panel_sides: tuple[float | None, ...] = ()
    source: str | None = None

    @property
    def n_pulses(self) -> int:
        return num_pulses(self.radar, self.geometry)

    @property
    def m(self) -> int:
        return self.processing.m if self.processing.m is not None else 2

    def grid(self) -> GridSpec:
        g = self.processing.grid
        center = g.get("center")
        if center is None:
            center = self.target_position()
        return GridSpec.centered(nx=int(g.get("nx", 64)), ny=int(g.get("ny", 64)),
                                 dx=float(g.get("dx", 15.0)), dy=float(g.get("dy", 6.0)),
                                 center=(float(center[0]), float(center[1])))

    def target_position(self) -> tuple[float, float]:
        targets = self.scene.targets
        if not targets:
            return (0.0, 0.0)
        t = targets[self.processing.target]
        return (t.x, t.y)

    def windows(self, grid: GridSpec | None = None) -> MeasurementWindows:
        grid = self.grid() if grid is None else grid
        return windows_from_dict(self.processing.windows, grid, *self.target_position())

    def tx_bits(self) -> np.ndarray | None:
        return tx_bits_of(self.scene, self.processing.target)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        seed = _check_seed(seed)
        return replace(self, seed=seed, scene=replace(self.scene, rng_seed=seed))

    def with_m(self, m: int) -> "ScenarioConfig":
        return replace(self, processing=replace(self.processing, m=int(m)))


def tx_bits_of(scene: SceneSpec | None, target: int = 0) -> np.ndarray | None:
    """Transmitted bits of a bit-sequence target, if any."""
    if scene is None or not scene.targets or target >= len(scene.targets):
        return None
    sched = scene.targets[target].schedule
    if sched.kind != "bit-sequence":
        return None
    return np.asarray(sched.bits, dtype=np.uint8)


def windows_from_dict(spec: dict, grid: GridSpec, x: float, y: float) -> MeasurementWindows:
    spec = _check_keys("processing.windows", spec, _WINDOW_KEYS)
    try:
        if "reflector" in spec or "clutter" in spec:
            if not ("reflector" in spec and "clutter" in spec):
                raise ConfigError("[processing.windows] give both reflector and clutter rectangles")
            wins = MeasurementWindows(PixelWindow(*map(int, spec["reflector"])),
                                      PixelWindow(*map(int, spec["clutter"])))
            wins.check(grid)
            return wins
        offset = spec.get("offset")
        return default_windows(grid, x, y, size=int(spec.get("size", 3)),
                               offset=None if offset is None else (int(offset[0]), int(offset[1])))
    except (DomainError, TypeError) as exc:
        raise ConfigError(f"[processing.windows] {exc}") from exc


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    if not 0 <= int(seed) < 2**64:
        raise ConfigError(f"seed {seed} outside the unsigned 64-bit range")
    return int(seed)


def _radar(d: dict) -> RadarParams:
    d = _check_keys("radar", d, _RADAR_KEYS)
    preset = d.pop("preset", None)
    if "carrier_frequency" in d:
        if "wavelength" in d:
            raise ConfigError("[radar] give wavelength or carrier_frequency, not both")
        d["wavelength"] = SPEED_OF_LIGHT / float(d.pop("carrier_frequency"))
    if preset is not None:
        if preset not in RADAR_PRESETS:
            raise ConfigError(f"[radar] unknown preset {preset!r}; choose from {sorted(RADAR_PRESETS)}")
        base = RADAR_PRESETS[preset]()
        return replace(base, **{k: float(v) for k, v in d.items()})
    missing = sorted(set(RadarParams.__dataclass_fields__) - set(d))
    if missing:
        raise ConfigError(f"[radar] missing key(s): {', '.join(missing)} (or set a preset)")
    return RadarParams(**{k: float(v) for k, v in d.items()})


def _geometry(d: dict) -> ImagingGeometry:
    d = _check_keys("geometry", d, _GEOMETRY_KEYS)
    preset = d.pop("preset", None)
    if "incidence_angle_deg" in d:
        if "incidence_angle" in d:
            raise ConfigError("[geometry] give incidence_angle (rad) or incidence_angle_deg, not both")
        d["incidence_angle"] = math.radians(float(d.pop("incidence_angle_deg")))
    if preset is not None:
        if preset not in GEOMETRY_PRESETS:
            raise ConfigError(f"[geometry] unknown preset {preset!r}; choose from {sorted(GEOMETRY_PRESETS)}")
        return replace(GEOMETRY_PRESETS[preset](), **{k: float(v) for k, v in d.items()})
    for key in ("slant_range", "incidence_angle"):
        if key not in d:
            raise ConfigError(f"[geometry] missing key {key!r} (or set a preset)")
    return ImagingGeometry(**{k: float(v) for k, v in d.items()})


def _target(i: int, d: dict, radar: RadarParams, aligner) -> tuple:
    d = _check_keys(f"scene.targets[{i}]", d, _TARGET_KEYS)
    panel = d.get("panel_side")
    if ("rcs_on" in d) == (panel is not None):
        raise ConfigError(f"[scene.targets[{i}]] give exactly one of rcs_on or panel_side")
    rcs_on = float(d["rcs_on"]) if "rcs_on" in d else rcs_max(float(panel), radar.wavelength)
    sched = _check_keys(f"scene.targets[{i}].schedule", d.get("schedule") or {"kind": "static-on"},
                        _SCHEDULE_KEYS)
    if sched.pop("align_to_sublooks", False):
        kind = sched.get("kind")
        derived = {"bit-sequence": ("symbol_duration", "start_offset"), "square-wave": ("period", "phase")}
        if kind not in derived:
            raise ConfigError(f"[scene.targets[{i}].schedule] align_to_sublooks needs bit-sequence or square-wave")
        for key in derived[kind]:
            if key in sched:
                raise ConfigError(f"[scene.targets[{i}].schedule] {key} is derived when align_to_sublooks is set")
        schedule = aligner(kind, [int(c) for c in str(sched.get("bits", ""))])
    else:
        schedule = ModulationSchedule.from_dict(sched)
    target = PointTarget(float(d.get("x", 0.0)), float(d.get("y", 0.0)), rcs_on,
                         float(d.get("rcs_off", 0.0)), schedule)
    return target, None if panel is None else float(panel)


def from_dict(data: dict, source: str | None = None) -> ScenarioConfig:
    """Build and cross-check a :class:`ScenarioConfig` from parsed YAML."""
    data = _check_keys("top level", data, _TOP_KEYS)
    if "seed" not in data:
        raise ConfigError("seed is mandatory")
    seed = _check_seed(data["seed"])
    try:
        radar = _radar(data.get("radar") or {"preset": "desk"})
        geometry = _geometry(data.get("geometry") or {"preset": "desk"})
        proc = _check_keys("processing", data.get("processing"), _PROC_KEYS)
        proc_cfg = ProcessingConfig(**proc)
        _check_keys("processing.grid", proc_cfg.grid, _GRID_KEYS)
        sim = SimulationConfig(**_check_keys("simulation", data.get("simulation"), _SIM_KEYS))
        bud = _check_keys("budget", data.get("budget"), _BUDGET_KEYS)
        budget = BudgetConfig(**{k: tuple(v) for k, v in bud.items()})
        sweep = None
        if data.get("sweep") is not None:
            sw = _check_keys("sweep", data["sweep"], _SWEEP_KEYS)
            for k in ("ebno_list_db", "bits_per_pass_list"):
                if k in sw:
                    sw[k] = tuple(sw[k])
            sweep = SweepConfig(**sw)
            if sweep.trials < 1000:
                raise ConfigError(f"[sweep] trials must be >= 1000, got {sweep.trials}")

        sc = _check_keys("scene", data.get("scene"), _SCENE_KEYS)
        pass_center = float(sc.get("pass_center_time", 0.0))

        def aligned(kind, bits):
            if kind == "square-wave":
                if proc_cfg.m is None:
                    raise ConfigError("an aligned square wave needs processing.m")
                return aligned_square_wave(radar, geometry, proc_cfg.m, proc_cfg.looks_per_symbol, pass_center)
            n_looks = proc_cfg.m if proc_cfg.m is not None else len(bits) * proc_cfg.looks_per_symbol
            if n_looks != len(bits) * proc_cfg.looks_per_symbol:
                raise ConfigError(
                    f"processing.m={n_looks} must equal len(bits) * looks_per_symbol = "
                    f"{len(bits) * proc_cfg.looks_per_symbol} for an aligned bit sequence"
                )
            return aligned_bit_schedule(bits, radar, geometry, proc_cfg.looks_per_symbol, pass_center)

        pairs = [_target(i, t, radar, aligned) for i, t in enumerate(sc.get("targets") or [])]
        clutter = _check_keys("scene.clutter", sc.get("clutter"), _CLUTTER_KEYS)
        cs = clutter.get("cell_size")
        scene = SceneSpec(
            geometry=geometry,
            targets=tuple(p[0] for p in pairs),
            clutter=ClutterSpec(float(clutter.get("sigma0", 0.0)), tuple(map(float, cs)) if cs else None),
            extent=tuple(map(float, sc.get("extent", (1000.0, 500.0)))),
            rng_seed=seed,
            pass_center_time=pass_center,
        )
        m_default = proc_cfg.m
        if m_default is None:
            bits = tx_bits_of(scene, proc_cfg.target)
            if bits is not None:
                proc_cfg = replace(proc_cfg, m=len(bits) * proc_cfg.looks_per_symbol)
        cfg = ScenarioConfig(seed=seed, radar=radar, geometry=geometry, scene=scene, simulation=sim,
                             processing=proc_cfg, budget=budget, sweep=sweep,
                             panel_sides=tuple(p[1] for p in pairs), source=source)
        validate(cfg)
        return cfg
    except ConfigError:
        raise
    except (DomainError, TypeError, ValueError, KeyError, IndexError) as exc:
        raise ConfigError(f"{source or 'config'}: {exc}") from exc


def validate(cfg: ScenarioConfig) -> None:
    """Referential checks: targets inside the scene, windows inside the grid."""
    cfg.scene.validate(cfg.radar)
    if cfg.processing.statistic not in ("scr_db", "coherent"):
        raise ConfigError(f"[processing] unknown statistic {cfg.processing.statistic!r}")
    if cfg.processing.threshold not in ("extremes", "two-means"):
        raise ConfigError(f"[processing] unknown threshold {cfg.processing.threshold!r}")
    if cfg.scene.targets and not 0 <= cfg.processing.target < len(cfg.scene.targets):
        raise ConfigError(f"[processing] target index {cfg.processing.target} out of range")
    cfg.windows()


def load(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return from_dict(data, source=str(path))
