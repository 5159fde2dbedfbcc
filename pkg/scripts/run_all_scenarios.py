"""Run every bundled scenario and print its checks.

    python scripts/run_all_scenarios.py [out_dir]
"""
import sys
from pathlib import Path

from gauge_lab.cli import bundled_scenarios, main


def run_all(out_root: Path) -> int:
    failed = []
    for name in bundled_scenarios():
        print(f"== {name}")
        if main(["run", "--config", name, "--out", str(out_root / name), "--check"]) != 0:
            failed.append(name)
    print(f"\n{len(failed)} scenario(s) with failing checks: {', '.join(failed) or 'none'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(run_all(Path(sys.argv[1] if len(sys.argv) > 1 else "runs")))
