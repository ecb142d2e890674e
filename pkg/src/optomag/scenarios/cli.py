"""Command-line entry point: ``optomag <command> [options]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import CascadeError, ConfigError, NumericalError, RegimeError, UnstableFormError
from . import protocols as pr
from .config import builtin_names, load_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help="config file path or built-in name (default: strong_coupling)")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--force", action="store_true",
                        help="run even if mandatory regime conditions fail")

    parser = argparse.ArgumentParser(
        prog="optomag",
        description="Reduction cascade, spectra and dynamics of the squeezed optomechanical "
                    "spin-magnon model. Writes CSV files.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("derive", parents=[common], help="full cascade with regime checks")
    fig2 = sub.add_parser("fig2", parents=[common],
                          help="photon numbers: linearized vs mechanics-eliminated")
    fig2.add_argument("--check-convergence", action="store_true",
                      help="rerun with doubled cavity and mechanical cutoffs and compare")
    sub.add_parser("fig3", parents=[common], help="polariton frequencies vs squeezed coupling")
    sub.add_parser("fig4", parents=[common], help="spin-LBP coupling enhancement vs Omega_A/W_c")
    sub.add_parser("fig5", parents=[common], help="spin-magnon Rabi oscillation, closed and open")
    sub.add_parser("appendix-c", parents=[common],
                   help="decay-dressed coefficients at the critical point vs W/K")
    sweep = sub.add_parser("sweep", parents=[common], help="cascade over a range of one input")
    sweep.add_argument("--var", required=True, help="configuration key to sweep")
    sweep.add_argument("--range", required=True, metavar="START:STOP:N",
                       help="linear grid in config units (Hz for frequencies)")
    sweep.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    sub.add_parser("configs", help="list built-in configuration names")
    return parser


def _written(paths):
    for p in paths:
        print(f"wrote {p}")


def _cmd_derive(cfg, out, args):
    res = pr.run_derive(cfg)
    print(res.table())
    path = out / "derive.csv"
    pr.write_table(path, res.rows, res.metadata)
    _written([path])


def _cmd_fig2(cfg, out, args):
    res = pr.run_fig2(cfg, check_convergence=args.check_convergence)
    paths = [out / "fig2_H_L.csv", out / "fig2_H_T.csv", out / "fig2_summary.csv"]
    res.linearized.to_csv(paths[0])
    res.eliminated.to_csv(paths[1])
    tol = cfg.get("convergence_tol")
    summary = pr.fig2_summary(res, tol)
    pr.write_table(paths[2], summary, res.metadata)
    for k, v in summary.items():
        print(f"{k} = {v}")
    _written(paths)
    if res.convergence is not None and not summary["cutoff_converged"]:
        raise NumericalError(
            f"cutoff doubling changed the photon numbers by {summary['cutoff_doubling_max_change']:.3g} "
            f"(tolerance {tol:g})")


def _cmd_sweep_like(res, path):
    res.to_csv(path)
    for key in ("crossing_G_sq_over_Wc", "G_cp_over_Wc"):
        if key in res.metadata:
            print(f"{key} = {res.metadata[key]}")
    _written([path])


def _cmd_fig5(cfg, out, args):
    res = pr.run_fig5(cfg, force=args.force)
    if not res.report.ok:
        print("warning: running despite failed regime conditions:", file=sys.stderr)
        for c in res.report.failures():
            print("  " + c.describe(), file=sys.stderr)
    paths = [out / "fig5_polariton.csv", out / "fig5_smp.csv", out / "fig5_effective.csv",
             out / "fig5_open.csv", out / "fig5_summary.csv"]
    for ts, p in zip((res.polariton, res.smp, res.effective, res.open), paths):
        ts.to_csv(p)
    pr.write_table(paths[-1], res.summary, res.metadata)
    for k, v in res.summary.items():
        print(f"{k} = {v}")
    _written(paths)


def _cmd_sweep(cfg, out, args):
    values = pr.parse_range(args.range)
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    res = pr.run_sweep(cfg, args.var, values, workers=args.workers)
    failed = sum(1 for e in res["error"] if e)
    if failed:
        print(f"{failed} of {len(values)} points failed; see the error column", file=sys.stderr)
    _cmd_sweep_like(res, out / f"sweep_{args.var}.csv")


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "configs":
        print("\n".join(builtin_names()))
        return EXIT_OK
    try:
        cfg = load_config(args.config, args.set)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "derive":
            _cmd_derive(cfg, out, args)
        elif args.command == "fig2":
            _cmd_fig2(cfg, out, args)
        elif args.command == "fig3":
            _cmd_sweep_like(pr.run_fig3(cfg), out / "fig3.csv")
        elif args.command == "fig4":
            _cmd_sweep_like(pr.run_fig4(cfg), out / "fig4.csv")
        elif args.command == "fig5":
            _cmd_fig5(cfg, out, args)
        elif args.command == "appendix-c":
            _cmd_sweep_like(pr.run_appendix_c(cfg), out / "appendix_c.csv")
        elif args.command == "sweep":
            _cmd_sweep(cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RegimeError as exc:
        print(f"regime check failed: {exc}", file=sys.stderr)
        for c in exc.report.failures():
            print("  " + c.describe(), file=sys.stderr)
        print("rerun with --force to override", file=sys.stderr)
        return EXIT_REGIME
    except (NumericalError, CascadeError, UnstableFormError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
