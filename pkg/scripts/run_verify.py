#!/usr/bin/env python3
"""Run the full verification harness and write JSON + CSV reports.

Usage:
    python scripts/run_verify.py [--seed 42] [--outdir out]
"""

import argparse
import sys
import time
from pathlib import Path

from curvlab import harness


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--outdir", default="out")
    ap.add_argument("--only", default=None,
                    help="comma-separated theorem ids (default: all)")
    args = ap.parse_args()

    cfg = harness.RunConfig(seed=args.seed)
    if args.only:
        cfg.theorems = tuple(t.strip() for t in args.only.split(","))
    cfg.validate()

    t0 = time.time()
    reports = harness.run_all(cfg)
    dt = time.time() - t0

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.json").write_text(harness.reports_json(reports))
    (outdir / "summary.csv").write_text(harness.reports_csv(reports))

    n_fail = 0
    for r in reports:
        fails = [f for f in r.fixtures if f.verdict == "FAIL"]
        n_fail += len(fails)
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.theorem:14s} "
              f"({len(r.fixtures)} fixtures)")
        for f in fails:
            print(f"      FAIL {f.fixture} / {f.quantity} = {f.value:.6g} "
                  f"(tol {f.tolerance:.2g})")
    print(f"\n{len(reports)} experiments, {n_fail} failing fixtures, {dt:.1f}s; "
          f"reports in {outdir}/")
    return 0 if n_fail == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
