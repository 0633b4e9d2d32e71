"""Regenerate the field tables and heatmaps for every config in configs/.

    python scripts/run_figures.py [--out-dir out] [--threads 4]
"""
import argparse
from pathlib import Path

from madelung_ops.config import load_config
from madelung_ops.runio import run

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=ROOT / "out")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    failed = 0
    for path in sorted((ROOT / "configs").glob("*.json")):
        cfg = load_config(path, out_dir=args.out_dir / path.stem)
        report = run(cfg, threads=args.threads)
        status = "ok" if report["passed"] else "RESIDUALS FAILED"
        print(f"{path.stem:28s} {len(report['artifacts'])} tables  "
              f"{report['timing']['total_s']:.2f} s  {status}")
        failed += not report["passed"]
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
