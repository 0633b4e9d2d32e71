"""Command line entry point: ``madelung-ops run|verify|compare``.

Exit status is 0 only when every requested threshold passes.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import load_config
from .errors import MadelungError
from .runio import compare, run, verify


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("config", help="JSON run configuration")
    p.add_argument("--out-dir", default=None, help="output directory (overrides config)")
    p.add_argument("--threads", type=int, default=None,
                   help="grid worker count (fallback: MK_THREADS, then 1)")
    p.add_argument("--raster", dest="raster", action="store_true", default=None,
                   help="write PGM heatmaps next to the CSV tables")
    p.add_argument("--no-raster", dest="raster", action="store_false")
    p.add_argument("--cap", type=float, default=None,
                   help="raster clipping magnitude (default 50)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="madelung-ops",
        description="Evaluate and verify separable-phase Madelung-Bohm solutions.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_flags(sub.add_parser("run", help="evaluate fields and write tables"))
    _add_run_flags(sub.add_parser("verify", help="PDE residuals only"))
    cmp_ = sub.add_parser("compare", help="diff two field tables")
    cmp_.add_argument("a")
    cmp_.add_argument("b")
    cmp_.add_argument("--tol", type=float, default=1e-10)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            diff = compare(args.a, args.b, args.tol)
            print(json.dumps(diff.to_dict(), indent=2))
            return 0 if diff.passed else 1
        cfg = load_config(args.config, out_dir=args.out_dir, threads=args.threads,
                          raster=args.raster, raster_cap=args.cap)
        if args.command == "run":
            report = run(cfg, threads=args.threads)
        else:
            report = verify(cfg)
    except (MadelungError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for eq, r in report.get("residuals", {}).items():
        status = "PASS" if r["pass"] else "FAIL"
        print(f"{status} {eq:12s} linf={r['linf']:.3e} (threshold {r['threshold']:.0e}, "
              f"{r['n_points']} points, {r['n_skipped']} skipped)")
    for a in report.get("artifacts", []):
        print(f"wrote {cfg.out_dir / a['path']} ({a['rows']} rows)")
    print(f"report {cfg.out_dir / report['report']}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
