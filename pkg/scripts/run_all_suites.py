"""Run every bundled suite and print one line per suite with its wall time."""

import argparse
import sys
import time
from pathlib import Path

from extremal_lab.cli import run
from extremal_lab.config import list_suites, load_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs", help="parent directory for per-suite outputs")
    ap.add_argument("--only", nargs="*", help="suite names to run (default: all)")
    args = ap.parse_args()

    names = [n for n, _, _ in list_suites()]
    if args.only:
        names = [n for n in names if n in set(args.only)]
    worst = 0
    for name in names:
        cfg = load_suite(name)
        t0 = time.perf_counter()
        code, _ = run(cfg, Path(args.out) / name)
        dt = time.perf_counter() - t0
        budget = cfg.budget_seconds
        late = budget is not None and dt > budget
        status = "PASS" if code == 0 and not late else "FAIL"
        print(f"{status}  {name:32s} {dt:7.1f} s  (budget {budget:g} s, exit {code})")
        worst = max(worst, code, 2 if late else 0)
    return worst


if __name__ == "__main__":
    sys.exit(main())
