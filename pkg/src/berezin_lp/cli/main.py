"""berezin-lp: run a catalog experiment and write its report.

Exit status: 0 when every declared criterion holds, 2 when one fails,
1 on a usage or numeric error.
"""
from __future__ import annotations

import argparse
import datetime
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from .. import __version__
from .catalog import CATALOG, NUMERIC_ERRORS
from .config import ConfigError, ExperimentConfig, build_config, load_config_file
from .report import ExperimentReport, emit

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def run(cfg: ExperimentConfig) -> ExperimentReport:
    """Run one experiment; cells are evaluated in parallel but assembled in input order."""
    entry = CATALOG[cfg.experiment]
    start = time.perf_counter()
    report = ExperimentReport(cfg.experiment, entry.anchor, cfg.to_dict(),
                              seed_registry=list(cfg.seeds))
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        def pmap(fn, items):
            return list(pool.map(fn, list(items)))

        try:
            out = entry.runner(cfg, pmap)
            report.rows, report.fits, report.checks = out.rows, out.fits, out.checks
            report.errors = list(out.errors)
        except NUMERIC_ERRORS + (ValueError,) as exc:
            report.errors.append(f"{type(exc).__name__}: {exc}")
    report.meta = {"runtime_s": time.perf_counter() - start,
                   "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                   "version": __version__}
    return report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="berezin-lp", description=__doc__.splitlines()[0])
    ap.add_argument("--experiment", required=True, choices=sorted(CATALOG), metavar="ID",
                    help="experiment id: " + ", ".join(CATALOG))
    ap.add_argument("--config", help="JSON file of configuration fields; flags override it")
    ap.add_argument("--space", choices=["fock", "cpn", "fbi"])
    ap.add_argument("--n", type=int, help="complex dimension")
    ap.add_argument("--N", help="list a,b,c or range a:b:step (b exclusive)")
    ap.add_argument("--p", help="list of exponents in [2, inf], e.g. 2,4,inf")
    ap.add_argument("--family", choices=["mu", "nu_k", "explicit"])
    ap.add_argument("--alpha", type=int)
    ap.add_argument("--index", help="explicit multi-index, comma separated")
    ap.add_argument("--E", type=float, help="energy level")
    ap.add_argument("--C", type=float, help="window half-width in units of 1/N")
    ap.add_argument("--seeds", help="seed count, list or range")
    ap.add_argument("--k", help="Hermite levels (list or range)")
    ap.add_argument("--radius", type=float, help="window kernel Fourier support radius")
    ap.add_argument("--kernel", choices=["fejer", "bump"])
    ap.add_argument("--tol-slope", type=float)
    ap.add_argument("--tol-rel", type=float)
    ap.add_argument("--out", help="output directory (nothing is written without it)")
    ap.add_argument("--format", default=None, help="comma list of csv, json, svg (default json)")
    ap.add_argument("--threads", type=int, help="worker threads (default from BEREZIN_LP_THREADS or 1)")
    return ap


def _overrides(args) -> dict:
    o = {"space": args.space, "n": args.n, "N": args.N, "p": args.p, "family": args.family,
         "alpha": args.alpha, "E": args.E, "C": args.C, "k": args.k, "radius": args.radius,
         "kernel": args.kernel, "tol_slope": args.tol_slope, "tol_rel": args.tol_rel,
         "out": args.out, "formats": args.format, "threads": args.threads}
    if args.index is not None:
        try:
            o["index"] = [int(x) for x in args.index.split(",")]
        except ValueError:
            raise ConfigError("index", f"cannot parse {args.index!r}") from None
    if args.seeds is not None:
        o["seeds"] = int(args.seeds) if args.seeds.isdigit() else args.seeds
    return o


def _summary(report: ExperimentReport) -> list:
    lines = [f"[{report.experiment}] {report.anchor}"]
    for f in report.fits:
        lines.append(f"  fit {f['label']}: slope {f['slope']:.4f} (target {f['target']:g}, "
                     f"{f['kind']}, tol {f['tol']:g}, r2 {f['r2']:.4f}) "
                     f"{'PASS' if f['pass'] else 'FAIL'}")
    for c in report.checks:
        lines.append(f"  check {c['name']}: {c['value']:.6g} vs {c['threshold']:.6g} "
                     f"{'PASS' if c['pass'] else 'FAIL'}")
    for e in report.errors:
        lines.append(f"  error {e}")
    lines.append(f"  result: {'PASS' if report.passed else 'FAIL'} "
                 f"({len(report.rows)} rows, {report.meta.get('runtime_s', 0):.2f}s)")
    return lines


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = load_config_file(args.config) if args.config else {}
        cfg = build_config(args.experiment, file_values, _overrides(args))
    except ConfigError as exc:
        print(f"berezin-lp: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR
    report = run(cfg)
    print("\n".join(_summary(report)))
    if cfg.out:
        try:
            for fmt in cfg.formats:
                print(f"  wrote {emit(report, fmt, cfg.out)}")
        except OSError as exc:
            print(f"berezin-lp: {exc}", file=sys.stderr)
            return EXIT_ERROR
    if report.errors:
        return EXIT_ERROR
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
