"""Command-line interface.

Subcommands share a JSON scenario file (--config) plus overrides and
write figure-ready CSV/JSON curves; --plot additionally renders a PNG per
curve next to the data file.  Exit codes: 0 success, 2 configuration
error, 3 numerical non-convergence on any curve, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .model import ArrayConfig
from .runner import (
    ConfigError,
    curve_from_dict,
    curve_to_csv,
    detect_threshold,
    emit,
    load_config,
    run_sweep,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3
EXIT_IO = 4


def _add_common(parser):
    parser.add_argument("--config", required=True, help="scenario JSON file")
    parser.add_argument("--snr-db", type=float, default=None,
                        help="evaluate a single SNR point instead of the configured sweep")
    parser.add_argument("--k", type=int, default=None,
                        help="override the antenna count (aperture kept fixed)")
    parser.add_argument("--aperture-m", type=float, default=None,
                        help="override the array aperture in meters (K kept fixed)")
    parser.add_argument("--engine", default=None,
                        help="comma-separated engine list overriding the config")
    parser.add_argument("--seed", type=int, default=None, help="Monte Carlo seed override")
    parser.add_argument("--out", default=None, help="output file (default: config output.path)")
    parser.add_argument("--format", choices=("csv", "json"), default=None,
                        help="output format (default: config output.format or csv)")
    parser.add_argument("--threshold-ratio", type=float, default=2.0,
                        help="zzb/crb ratio defining the SNR threshold")
    parser.add_argument("--plot", action="store_true",
                        help="also render a PNG per curve next to the data file")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nfzzb",
        description="Ziv-Zakai and Cramer-Rao bounds for near-field localization",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, descr in (
        ("crb", "global Cramer-Rao bound over the SNR sweep"),
        ("zzb", "Ziv-Zakai bound over the SNR sweep"),
        ("mle", "Monte Carlo maximum-likelihood MSE over the SNR sweep"),
        ("sweep", "all engines requested by the config"),
        ("threshold", "detect the SNR threshold from the zzb/crb ratio"),
    ):
        _add_common(sub.add_parser(name, help=descr))
    plot = sub.add_parser("plot", help="render PNGs from previously emitted JSON curves")
    plot.add_argument("curves", nargs="+", help="JSON curve files produced by --format json")
    return parser


def _apply_overrides(config, args):
    if args.k is not None or args.aperture_m is not None:
        arr = config.array
        k = args.k if args.k is not None else arr.num_antennas
        aperture = args.aperture_m if args.aperture_m is not None else arr.aperture
        try:
            arr = ArrayConfig.from_aperture(k, aperture, arr.carrier_freq)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        config = dataclasses.replace(config, array=arr)
    if args.snr_db is not None:
        config = dataclasses.replace(config, snr_db=(args.snr_db,))
    if args.seed is not None:
        config = dataclasses.replace(
            config, mc=dataclasses.replace(config.mc, seed=args.seed)
        )
    if args.engine is not None:
        engines = tuple(e.strip() for e in args.engine.split(",") if e.strip())
        config = dataclasses.replace(config, engines=engines)
    return config


def _restrict_engines(config, command):
    if command == "crb":
        return dataclasses.replace(config, engines=("crb_global",))
    if command == "zzb":
        zzb = tuple(e for e in config.engines if e.startswith("zzb_"))
        if not zzb:
            zzb = ("zzb_known_aoa" if config.prior.angle_degenerate else "zzb_joint_distance",)
        return dataclasses.replace(config, engines=zzb)
    if command == "mle":
        return dataclasses.replace(config, engines=("mle",))
    if command == "threshold":
        engines = set(config.engines) | {"crb_global"}
        if not any(e.startswith("zzb_") for e in engines):
            engines.add("zzb_known_aoa" if config.prior.angle_degenerate else "zzb_joint_distance")
        engines.discard("mle")  # not needed for the ratio test
        return dataclasses.replace(config, engines=tuple(sorted(engines)))
    return config


def _cmd_plot(args):
    from .plotting import plot_curve

    for path in args.curves:
        try:
            with open(path, encoding="utf-8") as fh:
                curve = curve_from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            print(f"error: cannot read curve file {path}: {exc}", file=sys.stderr)
            return EXIT_IO
        target = path.rsplit(".", 1)[0] + ".png"
        plot_curve(curve, target)
        print(f"wrote {target}")
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "plot":
        return _cmd_plot(args)

    try:
        config = load_config(args.config)
        config = _apply_overrides(config, args)
        config = _restrict_engines(config, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO

    curves = run_sweep(config)

    if args.command == "threshold":
        for curve in curves:
            if "zzb" in curve.series and "crb_global" in curve.series:
                th = detect_threshold(curve, args.threshold_ratio)
                shown = "none" if th is None else format(th, ".12g")
                print(f"{curve.parameter} threshold_db={shown}")

    out = args.out if args.out is not None else config.out_path
    fmt = args.format if args.format is not None else config.out_format
    if out is not None:
        try:
            written = emit(curves, fmt, out)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        for path in written:
            print(f"wrote {path}")
        if args.plot:
            from .plotting import plot_curves

            for path in plot_curves(curves, out):
                print(f"wrote {path}")
    elif args.command != "threshold":
        for curve in curves:
            sys.stdout.write(curve_to_csv(curve))

    if any(not c.all_converged for c in curves):
        print("warning: at least one curve did not converge", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
