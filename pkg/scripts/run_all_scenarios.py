#!/usr/bin/env python3
"""Run every bundled scenario and print a one-line verdict per scenario."""

import argparse
import sys

from ehrenlab.scenarios import bundled, bundled_names


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs", help="output directory")
    ap.add_argument("--only", nargs="*", help="subset of scenario names")
    args = ap.parse_args(argv)
    failed = []
    for name in args.only or bundled_names():
        s = bundled(name).run(args.out)
        worst = [c.name for c in s.checks if not c.passed]
        print(f"{'PASS' if s.passed else 'FAIL'}  {name:<28} {s.wall_time:7.2f} s  {' '.join(worst)}")
        if not s.passed:
            failed.append(name)
    print(f"{len(failed)} of {len(args.only or bundled_names())} scenarios failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
