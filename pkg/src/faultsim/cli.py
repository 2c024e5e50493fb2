"""Command line entry point: faultsim {simulate,check-gains,sweep,dump-config,plot}."""

import argparse
import glob
import logging
import os
import sys

from faultsim.config import (ConfigError, GainCheckError, dump_config, enforce_gain_checks,
                             gain_reports, load_config, parse_config)
from faultsim.core import IntegrationError

EXIT_OK, EXIT_CONFIG, EXIT_GAINS, EXIT_INTEGRATION = 0, 2, 3, 4


def _load(path, strict=None):
    if path is None:
        return parse_config("", strict=strict)
    return load_config(path, strict=strict)


def gain_lines(cfg):
    k1, k2 = gain_reports(cfg)
    return [
        f"k1 = {k1.k1!r}",
        f"k1_threshold = {k1.threshold!r}",
        f"k1_margin = {k1.margin!r}",
        f"k1_satisfied = {str(k1.satisfied).lower()}",
        f"k2_max_eig = {k2.max_eig!r}",
        f"k2_a_r = {k2.a_r!r}",
        f"k2_satisfied = {str(k2.satisfied).lower()}",
        f"lambda1 = {cfg.low.lambda1!r}",
        f"lambda2 = {cfg.low.lambda2!r}",
        f"low_level_gain_bound = {cfg.low.lambda1 / cfg.low.lambda2!r}",
    ], k1, k2


def cmd_check_gains(args):
    cfg = _load(args.config, strict=False)
    lines, k1, k2 = gain_lines(cfg)
    print(f"k1 condition: k1 = {k1.k1:g} vs threshold {k1.threshold:.4f} "
          f"(margin {k1.margin:+.4f}) -> {'PASS' if k1.satisfied else 'FAIL'}")
    print(f"k2 condition: largest eigenvalue {k2.max_eig:.6g} (need <= 0, a_r = {k2.a_r:.4f}) "
          f"-> {'PASS' if k2.satisfied else 'FAIL'}")
    print()
    print("\n".join(lines))
    if args.strict and not (k1.satisfied and k2.satisfied):
        return EXIT_GAINS
    return EXIT_OK


def cmd_simulate(args):
    from faultsim.harness import run_scenario
    from faultsim.io import write_outputs
    cfg = _load(args.config, strict=True if args.strict else None)
    if args.seed is not None:
        cfg = cfg.with_overrides(**{"wind.seed": args.seed})
    if not cfg.strict:
        k1, k2 = gain_reports(cfg)
        if not k1.satisfied:
            logging.warning("k1 = %g is below the sufficient threshold %.4f", k1.k1, k1.threshold)
        if not k2.satisfied:
            logging.warning("k2 sufficient condition fails (largest eigenvalue %.4g)", k2.max_eig)
    traj, metrics = run_scenario(cfg)
    write_outputs(cfg, traj, metrics, args.out)
    print(f"scenario {cfg.name} (seed {cfg.seed}): wrote {args.out}")
    for k, v in metrics.flat().items():
        print(f"{k} = {v!r}")
    return EXIT_OK


def cmd_sweep(args):
    from faultsim.harness import run_sweep
    paths = sorted(glob.glob(os.path.join(args.config_dir, "*.ini")))
    cfgs = []
    for p in paths:
        cfg = load_config(p)
        if cfg.values["scenario.name"] == "default":
            cfg = cfg.with_overrides(**{"scenario.name": os.path.splitext(os.path.basename(p))[0]})
        cfgs.append(cfg)
    report = run_sweep(cfgs, workers=args.workers, out_dir=args.out)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "sweep.csv"), "w") as fh:
        fh.write(report.table())
    sys.stdout.write(report.table())
    for name, err in report.failures:
        print(f"FAILED {name}: {err}", file=sys.stderr)
    return EXIT_INTEGRATION if report.failures else EXIT_OK


def cmd_dump_config(args):
    sys.stdout.write(dump_config(_load(args.config)))
    return EXIT_OK


def cmd_plot(args):
    from faultsim.io import emit_svg, read_csv
    traj, _ = read_csv(args.traj)
    channels = [c.strip() for c in args.channels.split(",") if c.strip()]
    t_range = None
    if args.window:
        lo, hi = (float(s) for s in args.window.split(","))
        t_range = (lo, hi)
    emit_svg(traj, channels, args.out, t_range=t_range)
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="faultsim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("--config", help="scenario file (defaults if omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="out")
    p.add_argument("--strict", action="store_true", help="fail on gain-condition violations")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-gains", help="evaluate the gain conditions")
    p.add_argument("--config")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_check_gains)

    p = sub.add_parser("sweep", help="run every *.ini in a directory")
    p.add_argument("--config-dir", required=True)
    p.add_argument("--out", default="sweep_out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("dump-config", help="print the fully resolved configuration")
    p.add_argument("--config")
    p.set_defaults(func=cmd_dump_config)

    p = sub.add_parser("plot", help="render channels of a trajectory CSV to SVG")
    p.add_argument("--traj", required=True)
    p.add_argument("--channels", default="beta")
    p.add_argument("--out", required=True)
    p.add_argument("--window", help="t_start,t_end")
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GainCheckError as exc:
        print(f"gain check failed: {exc}", file=sys.stderr)
        return EXIT_GAINS
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
