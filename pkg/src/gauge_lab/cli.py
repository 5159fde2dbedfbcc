"""Command line: ``gauge-lab run | list-scenarios | validate``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from .scenario import ScenarioError, parse_scenario

log = logging.getLogger("gauge_lab")


def bundled_scenarios() -> dict:
    """Name -> INI text of the scenarios shipped with the package."""
    root = resources.files("gauge_lab") / "scenarios"
    return {p.name[:-4]: p.read_text() for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith(".ini")}


def _load(config: str) -> str:
    path = Path(config)
    if path.exists():
        return path.read_text()
    bundled = bundled_scenarios()
    if config in bundled:
        return bundled[config]
    raise FileNotFoundError(f"no such config file or bundled scenario: {config}")


def _cmd_run(args) -> int:
    from .runner import run

    sc = parse_scenario(_load(args.config))
    threads = None
    if os.environ.get("GAUGE_LAB_THREADS"):
        threads = max(1, int(os.environ["GAUGE_LAB_THREADS"]))
    report = run(sc, args.out, seed=args.seed, threads=threads)
    if args.check:
        for c in report.checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: "
                  f"{_num(c.measured)} {c.op} {_num(c.threshold)}")
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    n_ok = sum(c.passed for c in report.checks)
    print(f"{sc.name}: {n_ok}/{len(report.checks)} checks passed, "
          f"{len(report.artifacts)} artifacts in {args.out} ({report.wall_clock:.2f} s)")
    return 0 if report.passed else 1


def _num(v) -> str:
    if v is None or isinstance(v, str):
        return str(v)
    return f"{v:.12g}"


def _cmd_list(args) -> int:
    for name, text in bundled_scenarios().items():
        sc = parse_scenario(text)
        print(f"{name}\t{sc.kind}\t{sc.description}")
    return 0


def _cmd_validate(args) -> int:
    sc = parse_scenario(_load(args.config))
    print(f"ok: {sc.name} ({sc.kind}), checks: {', '.join(sc.checks) or 'none'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gauge-lab", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario and write its artifacts")
    r.add_argument("--config", required=True, help="INI file or bundled scenario name")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    r.add_argument("--check", action="store_true",
                   help="print every check with its measured value and threshold")
    r.set_defaults(func=_cmd_run)
    ls = sub.add_parser("list-scenarios", help="list bundled scenarios")
    ls.set_defaults(func=_cmd_list)
    v = sub.add_parser("validate", help="parse and validate a scenario")
    v.add_argument("--config", required=True)
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
