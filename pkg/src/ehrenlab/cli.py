"""Command line entry point: ``ehrenlab run|list|check|export-reference``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import estimates, temperature
from .constants import CONSTANTS
from .errors import ConfigurationError, DomainError, EhrenlabError, NumericalError
from .scenarios import bundled_names, list_scenarios, resolve

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _targets(args) -> list[str]:
    if args.all:
        return bundled_names()
    if not args.scenarios:
        raise ConfigurationError("name at least one scenario (file or bundled name) or pass --all")
    return args.scenarios


def _execute(args, verbose: bool) -> int:
    status = EXIT_OK
    for target in _targets(args):
        sc = resolve(target)
        summary = sc.run(args.out)
        if verbose:
            print(f"{summary.scenario}: {'PASS' if summary.passed else 'FAIL'} ({summary.wall_time:.2f} s)")
            for c in summary.checks:
                bound = " ".join(f"{k}={v:g}" for k, v in (("min", c.min), ("max", c.max)) if v is not None)
                print(f"  {'ok  ' if c.passed else 'FAIL'} {c.name} = {c.value:.6g} [{bound}]")
        if not summary.passed:
            status = EXIT_CHECK
    return status


def cmd_run(args) -> int:
    return _execute(args, verbose=True)


def cmd_check(args) -> int:
    return _execute(args, verbose=False)


def cmd_list(args) -> int:
    rows = list_scenarios()
    if args.json:
        print(json.dumps(rows, indent=2))
        return EXIT_OK
    width = max(len(r["name"]) for r in rows)
    for r in rows:
        print(f"{r['name']:<{width}}  {r['anchor']}")
    return EXIT_OK


def reference_numbers() -> dict:
    """Quoted numbers the scenarios are compared against, with our computed values."""
    doubling = {r.name: {"computed_s": r.doubling_time, "quoted_s": r.reference} for r in estimates.doubling_table()}
    mirror = estimates.mirror_audit(4.0e4, 1e-16, 100.0)
    return {
        "h_over_kB": {"computed": CONSTANTS.h_over_kB, "quoted": 4.8e-11},
        "doubling_times_1um": doubling,
        "mirror_budget": {"product_computed": mirror.record.product, "product_quoted": 4e-26,
                          "ratio_computed": mirror.record.ratio_to_bound, "ratio_quoted": 1e2},
        "rule_of_thumb": {"product_quoted": 1e-10, "ratio_computed": estimates.rule_of_thumb_audit().ratio_to_bound},
    }


def cmd_export(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "boundary_temperatures.csv").write_text(temperature.builtin_table_text(), encoding="utf-8")
    (out / "reference_numbers.json").write_text(json.dumps(reference_numbers(), indent=2, sort_keys=True) + "\n",
                                                encoding="utf-8")
    print(f"wrote {out / 'boundary_temperatures.csv'} and {out / 'reference_numbers.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ehrenlab", description="Ehrenfest / Newton correspondence laboratory")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, text in (("run", cmd_run, "run scenarios and print check verdicts"),
                           ("check", cmd_check, "run scenarios, report through the exit status only")):
        p = sub.add_parser(name, help=text)
        p.add_argument("scenarios", nargs="*", help="scenario TOML files or bundled names")
        p.add_argument("--all", action="store_true", help="every bundled scenario")
        p.add_argument("--out", default="runs", help="output directory (default: runs)")
        p.set_defaults(func=fn)
    p = sub.add_parser("list", help="list bundled scenarios")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_list)
    p = sub.add_parser("export-reference", help="write the reference table and quoted numbers")
    p.add_argument("--out", default="reference")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EhrenlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
