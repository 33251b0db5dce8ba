"""Command-line entry point: ``sarbackscatter <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 file-format error,
4 numerical-validity error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import config as config_mod
from .config import ScenarioConfig, tx_bits_of, windows_from_dict
from .demod import build_link_report, default_windows
from .exceptions import ConfigError, FormatError, SarError
from .experiments import ber_sweep
from .io import read_sarl, read_stack, write_json, write_link_report, write_power_csv, write_rows_csv, \
    write_sarl, write_stack
from .link_budget import (
    azimuth_resolution,
    coherent_sample_counts,
    ground_range_resolution,
    image_snr,
    max_bit_rate,
    max_throughput,
    ook_ber,
    single_pulse_snr,
    sublook_plan,
    to_db,
)
from .processor import GridSpec, make_sublooks, range_compress
from .scene import dwell_time, synthesize

log = logging.getLogger("sarbackscatter")

EXIT_OK, EXIT_CONFIG, EXIT_FORMAT, EXIT_NUMERIC = 0, 2, 3, 4

RAW_NAME = "raw.sarl"
STACK_NAME = "stack.sars"
POWER_NAME = "sublook_power.csv"
REPORT_JSON = "link_report.json"
REPORT_CSV = "link_report.csv"


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config(args) -> ScenarioConfig:
    cfg = config_mod.load(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "m", None) is not None:
        cfg = cfg.with_m(args.m)
    return cfg


# ---------------------------------------------------------------------------
# budget
# ---------------------------------------------------------------------------

def budget_report(cfg: ScenarioConfig) -> dict:
    """All closed-form link quantities for the configured system."""
    r, g = cfg.radar, cfg.geometry
    counts = coherent_sample_counts(r, g)
    sigma0_c = cfg.scene.clutter.sigma0
    out = {
        "carrier_frequency_hz": r.carrier_frequency,
        "wavelength_m": r.wavelength,
        "ground_range_resolution_m": ground_range_resolution(r.chirp_bandwidth, g.incidence_angle),
        "azimuth_resolution_m": azimuth_resolution(r.antenna_length),
        "dwell_time_s": dwell_time(r, g),
        "n_range": counts.n_range,
        "n_azimuth": counts.n_azimuth,
        "max_bit_rate_bps": max_bit_rate(r.prf),
        "max_throughput_bits_per_pass": max_throughput(counts.n_azimuth_int),
        "clutter_sigma0": sigma0_c,
        "targets": [],
    }
    if sigma0_c > 0:
        snr_c = single_pulse_snr(r, g, sigma0_c)
        out["clutter_single_pulse_snr_db"] = float(to_db(snr_c))
        out["clutter_image_snr_db"] = float(to_db(image_snr(snr_c, counts.n_range, counts.n_azimuth)))
    for i, (t, panel) in enumerate(zip(cfg.scene.targets, cfg.panel_sides)):
        snr_on = single_pulse_snr(r, g, t.rcs_on / g.scatter_area)
        img_on = image_snr(snr_on, counts.n_range, counts.n_azimuth)
        img_off = image_snr(single_pulse_snr(r, g, t.rcs_off / g.scatter_area), counts.n_range, counts.n_azimuth)
        entry = {
            "index": i,
            "panel_side_m": panel,
            "panel_side_ft": None if panel is None else panel / 0.3048,
            "rcs_on_dbsm": float(to_db(t.rcs_on)),
            "rcs_off_dbsm": None if t.rcs_off == 0 else float(to_db(t.rcs_off)),
            "single_pulse_snr_db": float(to_db(snr_on)),
            "image_snr_db": float(to_db(img_on)),
            "scr_db": None if sigma0_c == 0 else float(to_db(t.rcs_on / g.scatter_area / sigma0_c)),
            "image_snr_on": img_on,
            "image_snr_off": img_off,
        }
        out["targets"].append(entry)
    return out


def sublook_rows(cfg: ScenarioConfig, report: dict) -> list[list]:
    r = cfg.radar
    n_a = coherent_sample_counts(r, cfg.geometry).n_azimuth_int
    tgt = report["targets"][cfg.processing.target] if report["targets"] else None
    rows = []
    for m in cfg.budget.m_list:
        if m > n_a:
            continue
        plan = sublook_plan(n_a, m, r.prf)
        look_snr = math.nan if tgt is None else tgt["image_snr_on"] / m
        ber = math.nan if tgt is None else ook_ber(tgt["image_snr_on"], tgt["image_snr_off"], m)
        rows.append([int(m), plan.delta_t, azimuth_resolution(r.antenna_length, m),
                     float(to_db(look_snr)) if tgt else math.nan, ber])
    return rows


def prf_rows(cfg: ScenarioConfig) -> list[list]:
    rows = []
    for prf in cfg.budget.prf_list:
        radar = replace(cfg.radar, prf=float(prf))
        n_a = coherent_sample_counts(radar, cfg.geometry).n_azimuth_int
        rows.append([float(prf), max_bit_rate(prf), n_a, max_throughput(n_a)])
    return rows


def format_budget(report: dict, sub_rows, prf_table) -> str:
    lines = [
        f"carrier frequency        {report['carrier_frequency_hz'] / 1e9:.4f} GHz",
        f"wavelength               {report['wavelength_m']:.5f} m",
        f"ground-range resolution  {report['ground_range_resolution_m']:.3f} m",
        f"azimuth resolution       {report['azimuth_resolution_m']:.3f} m",
        f"dwell time               {report['dwell_time_s'] * 1e3:.1f} ms",
        f"N_R (range samples)      {report['n_range']:.1f}",
        f"N_A (azimuth samples)    {report['n_azimuth']:.1f}",
        f"max bit rate             {report['max_bit_rate_bps']:.1f} bps",
        f"max throughput per pass  {report['max_throughput_bits_per_pass']:.1f} bits",
    ]
    if "clutter_image_snr_db" in report:
        lines.append(f"clutter image SNR        {report['clutter_image_snr_db']:.2f} dB")
    for t in report["targets"]:
        size = "" if t["panel_side_ft"] is None else f" ({t['panel_side_ft']:.2f} ft panel)"
        scr = "n/a (no clutter)" if t["scr_db"] is None else f"{t['scr_db']:.2f} dB"
        lines.append(f"target {t['index']}{size}: RCS {t['rcs_on_dbsm']:.2f} dBsm, "
                     f"pulse SNR {t['single_pulse_snr_db']:.2f} dB, image SNR {t['image_snr_db']:.2f} dB, SCR {scr}")
    if sub_rows:
        lines.append("")
        lines.append(f"{'m':>5} {'dt [ms]':>10} {'az res [m]':>11} {'look SNR [dB]':>14} {'BER':>12}")
        for m, dt, res, snr, ber in sub_rows:
            lines.append(f"{m:>5d} {dt * 1e3:>10.3f} {res:>11.2f} {snr:>14.2f} {ber:>12.4g}")
    lines.append("")
    lines.append(f"{'PRF [Hz]':>9} {'max bps':>9} {'N_A':>7} {'bits/pass':>10}")
    for prf, bps, n_a, tp in prf_table:
        lines.append(f"{prf:>9.0f} {bps:>9.0f} {n_a:>7d} {tp:>10.0f}")
    return "\n".join(lines)


def cmd_budget(args) -> int:
    cfg = _load_config(args)
    report = budget_report(cfg)
    sub = sublook_rows(cfg, report)
    prf = prf_rows(cfg)
    text = format_budget(report, sub, prf)
    print(text)
    if args.out:
        out = _out_dir(args)
        (out / "budget.txt").write_text(text + "\n")
        write_json(out / "budget.json", {**report, "sublooks": sub, "prf_table": prf})
        write_rows_csv(out / "budget_sublooks.csv", ["m", "delta_t_s", "azimuth_resolution_m",
                                                     "sublook_snr_db", "ber"], sub)
        write_rows_csv(out / "budget_prf.csv", ["prf_hz", "max_bit_rate_bps", "n_azimuth",
                                                "max_bits_per_pass"], prf)
    return EXIT_OK


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------

def simulate_stage(cfg: ScenarioConfig, out: Path, threads: int = 1) -> Path:
    sim = cfg.simulation
    raw = synthesize(cfg.scene, cfg.radar, sample_rate=sim.sample_rate, noise=sim.noise,
                     clutter_oversample=sim.clutter_oversample, threads=threads)
    log.info("simulated %d pulses x %d samples", raw.num_pulses, raw.samples_per_pulse)
    return write_sarl(out / RAW_NAME, raw)


def process_stage(raw_path: Path, out: Path, m: int, cfg: ScenarioConfig | None = None,
                  threads: int = 1) -> Path:
    raw = read_sarl(raw_path)
    upsample = cfg.processing.upsample if cfg else 8
    if cfg is not None:
        grid = cfg.grid()
    else:
        center = (raw.truth.targets[0].x, raw.truth.targets[0].y) if raw.truth and raw.truth.targets else (0.0, 0.0)
        grid = GridSpec.centered(center=center)
    stack = make_sublooks(range_compress(raw, upsample=upsample), m, grid, threads=threads)
    path = write_stack(out / STACK_NAME, stack)
    write_power_csv(out / POWER_NAME, stack)
    log.info("formed %d sublooks on a %dx%d grid", stack.m, grid.nx, grid.ny)
    return path


def demod_stage(stack_path: Path, out: Path, cfg: ScenarioConfig | None = None):
    stack = read_stack(stack_path)
    truth = stack.truth
    target = cfg.processing.target if cfg else 0
    pos = (truth.targets[target].x, truth.targets[target].y) if truth and truth.targets else (0.0, 0.0)
    if cfg is not None:
        windows = windows_from_dict(cfg.processing.windows, stack.grid, *pos)
        p = cfg.processing
        opts = dict(looks_per_symbol=p.looks_per_symbol, statistic=p.statistic, threshold=p.threshold,
                    min_contrast_db=p.min_contrast_db)
    else:
        windows = default_windows(stack.grid, *pos)
        opts = {}
    rcs = None
    if truth is not None and truth.targets:
        t = truth.targets[target]
        rcs = (t.rcs_on, t.rcs_off)
    report = build_link_report(stack, windows, tx_bits=tx_bits_of(truth, target), target_rcs=rcs, **opts)
    write_link_report(out / REPORT_JSON, out / REPORT_CSV, report)
    return report


def _print_report(report) -> None:
    if not report.modulated:
        print("no modulation detected")
        return
    bits = "".join(map(str, report.decoded_bits))
    msg = f"decoded bits: {bits} (threshold {report.threshold_db:.3f})"
    if report.empirical_ber is not None:
        msg += f"; empirical BER {report.empirical_ber:.4g}"
    print(msg)


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    path = simulate_stage(cfg, _out_dir(args), args.threads)
    print(path)
    return EXIT_OK


def cmd_process(args) -> int:
    cfg = _load_config(args) if args.config else None
    m = args.m if args.m is not None else (cfg.m if cfg else None)
    if m is None:
        raise ConfigError("process needs --m or a config with processing.m")
    print(process_stage(Path(args.input), _out_dir(args), m, cfg, args.threads))
    return EXIT_OK


def cmd_demod(args) -> int:
    cfg = _load_config(args) if args.config else None
    _print_report(demod_stage(Path(args.input), _out_dir(args), cfg))
    return EXIT_OK


def cmd_run_all(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    raw = simulate_stage(cfg, out, args.threads)
    stack = process_stage(raw, out, cfg.m, cfg, args.threads)
    _print_report(demod_stage(stack, out, cfg))
    return EXIT_OK


def cmd_ber_sweep(args) -> int:
    cfg = _load_config(args)
    sw = cfg.sweep or config_mod.SweepConfig()
    trials = args.trials if args.trials is not None else sw.trials
    if trials < 1000:
        raise ConfigError(f"trials must be >= 1000 per point, got {trials}")
    rows = ber_sweep(cfg.radar, cfg.geometry, sw.ebno_list_db, sw.bits_per_pass_list, trials,
                     seed=cfg.seed, threads=args.threads, looks_per_symbol=sw.looks_per_symbol,
                     statistic=sw.statistic, threshold=sw.threshold, upsample=sw.upsample)
    out = _out_dir(args)
    path = write_rows_csv(out / "ber_sweep.csv",
                          ["ebno_db", "bits_per_pass", "m", "empirical_ber", "theoretical_ber", "trials"],
                          [[r.ebno_db, r.bits_per_pass, r.m, r.empirical_ber, r.theoretical_ber, r.trials]
                           for r in rows])
    for r in rows:
        print(f"Eb/N0 {r.ebno_db:5.1f} dB  bits/pass {r.bits_per_pass:4d}  empirical {r.empirical_ber:.5f}  "
              f"theory {r.theoretical_ber:.5f}  z {r.z_score:+.2f}")
    print(path)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sarbackscatter",
                                     description="SAR backscatter OOK link simulator and processor")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_, config_required=True, input_=False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=config_required, help="scenario YAML file")
        p.add_argument("--seed", type=_u64, help="override the config seed")
        p.add_argument("--m", type=_positive, help="number of sublooks")
        p.add_argument("--out", default="out" if name != "budget" else None, help="output directory")
        p.add_argument("--threads", type=_positive, default=1)
        p.add_argument("--trials", type=_positive, help="Monte-Carlo bits per sweep point")
        if input_:
            p.add_argument("--input", required=True, help="input artifact from the previous stage")
        p.set_defaults(func=func)
        return p

    add("budget", cmd_budget, "closed-form link budget report")
    add("simulate", cmd_simulate, "synthesize raw echoes to a SARL file")
    add("process", cmd_process, "range compress and form sublooks", config_required=False, input_=True)
    add("demod", cmd_demod, "measure sublooks and decode bits", config_required=False, input_=True)
    add("run-all", cmd_run_all, "simulate, process and demodulate")
    add("ber-sweep", cmd_ber_sweep, "Monte-Carlo BER sweep against the closed form")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, FileNotFoundError) as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (SarError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
