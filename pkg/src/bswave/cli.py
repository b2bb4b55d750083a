"""Command-line entry point.

    bswave rod-wave    --config cfg.json --out out/
    bswave beam-wave   --preset beam --out out/
    bswave dt-study    --config cfg.json --out out/
    bswave crack-sweep --preset crack-rod --out out/ --jobs 4
    bswave crack-locate --csv out/sensors.csv --length 1.5 --velocity 5063
    bswave validate    --config cfg.json

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config, preset
from .crack import CrackError
from .elements import MeshError
from .io import flatten_report, read_sensor_csv, write_outputs
from .pim import NumericalError
from .scenarios import run_beam_wave, run_crack_scenarios, run_diameter_sweep, run_dt_study, run_rod_wave
from .signal import SignalError, detect_arrivals, locate_crack


EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _config(args, default_preset: str) -> ScenarioConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = preset(args.preset or default_preset)
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    return cfg


def _cmd_rod(args):
    cfg = _config(args, "rod")
    rec, report = run_rod_wave(cfg)
    write_outputs(rec, report, cfg.output_dir)
    if cfg.diameters:
        recs, drep = run_diameter_sweep(cfg)
        for rec_d, row in zip(recs, drep["rows"]):
            write_outputs(rec_d, row, Path(cfg.output_dir) / f"d{row['diameter_m'] * 1e3:g}mm")
        write_outputs(None, drep, cfg.output_dir, prefix="diameters_")
    return report


def _cmd_beam(args):
    cfg = _config(args, "beam")
    rec, report = run_beam_wave(cfg)
    write_outputs(rec, report, cfg.output_dir)
    return report


def _cmd_dt(args):
    cfg = _config(args, "rod")
    runs, report = run_dt_study(cfg)
    for i, row in enumerate(report["rows"]):
        rec = runs.get(row["dt_requested_s"])
        if rec is not None:
            # Full-field series are large; keep the snapshots and the report.
            rec.series = {}
            write_outputs(rec, None, Path(cfg.output_dir) / f"dt{i}")
    write_outputs(None, report, cfg.output_dir)
    return report


def _cmd_crack(args):
    cfg = _config(args, "crack-rod")
    records, beam_rec, report = run_crack_scenarios(cfg, jobs=args.jobs)
    for i, rec in enumerate(records):
        write_outputs(rec, None, Path(cfg.output_dir) / f"crack{i}")
    if beam_rec is not None:
        write_outputs(beam_rec, None, Path(cfg.output_dir) / "beam")
    write_outputs(None, report, cfg.output_dir)
    return report


def _cmd_locate(args):
    rec = read_sensor_csv(args.csv)
    label = args.label or next(iter(rec.series))
    packets = detect_arrivals(rec.series[label], rec.dt, args.threshold, 1.0 / args.fc)
    est = locate_crack(packets, args.length, args.velocity)
    report = {"sensor": label, "t_direct_s": est.t_direct, "t_crack_s": est.t_crack, "crack_estimate_m": est.x_c}
    if args.out:
        write_outputs(None, report, args.out)
    return report


def _cmd_validate(args):
    cfg = _config(args, "rod")
    print(cfg.to_json())
    return None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bswave", description="BSWI finite elements with precise time integration")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON scenario file")
        s.add_argument("--preset", choices=["rod", "beam", "crack-rod"], help="built-in scenario")
        s.add_argument("--out", help="output directory (overrides output_dir)")
        s.add_argument("--jobs", type=int, default=1, help="parallel jobs for sweeps")
        s.add_argument("--seed", type=int, help="unused; runs are deterministic")
        s.set_defaults(func=func)
        return s

    scenario("rod-wave", _cmd_rod, "rod wave propagation")
    scenario("beam-wave", _cmd_beam, "Timoshenko beam wave propagation")
    scenario("dt-study", _cmd_dt, "time-step comparison")
    scenario("crack-sweep", _cmd_crack, "crack-location sweep")
    scenario("validate", _cmd_validate, "check a configuration and print it normalized")

    loc = sub.add_parser("crack-locate", help="locate a crack from an existing sensors.csv")
    loc.add_argument("--csv", required=True)
    loc.add_argument("--length", type=float, required=True)
    loc.add_argument("--velocity", type=float, required=True)
    loc.add_argument("--label")
    loc.add_argument("--threshold", type=float, default=0.1)
    loc.add_argument("--fc", type=float, default=100e3, help="carrier frequency (Hz)")
    loc.add_argument("--out")
    loc.set_defaults(func=_cmd_locate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        report = args.func(args)
    except (ConfigError, MeshError, CrackError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SignalError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    if report is not None:
        for key, val in flatten_report(report):
            print(f"{key}={val}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
