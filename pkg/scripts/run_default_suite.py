#!/usr/bin/env python3
"""Run the shipped verification suite and print a one-line-per-experiment summary.

Usage: python scripts/run_default_suite.py [out_dir]
"""

import json
import sys
from pathlib import Path

from modlab.experiments import run_suite

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    config_dir = ROOT / "configs" / "experiments"
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "results" / "default_suite"
    code = run_suite(config_dir, out_dir)
    report = json.loads((out_dir / "suite_report.json").read_text())
    for rec in report["records"]:
        ratio = "-" if rec["ratio"] is None else f"{rec['ratio']:.4f}"
        flag = "ok " if rec["passed"] else "FAIL"
        print(f"  {flag} {rec['experiment_id']:<28} status={rec['status']:<6} ratio={ratio}")
    print(f"passed {report['n_passed']}/{report['n_experiments']}; artifacts in {out_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())
