#!/usr/bin/env python3
"""Recompute summary.csv from the run.json files of an experiment directory."""

import argparse
import csv
import json
import statistics
import sys
from collections import defaultdict
from pathlib import Path


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("dir", type=Path, help="experiment output directory")
    ap.add_argument("--tol", type=float, default=1e-9)
    args = ap.parse_args()

    cells = defaultdict(list)
    for path in sorted((args.dir / "runs").glob("**/run.json")):
        run = json.loads(path.read_text())
        cfg = run["config"]
        key = (run["problem"], cfg["kind"], cfg["scalarizer"]["method"])
        cells[key].append(run["final_lhd"])

    bad = 0
    seen = set()
    with open(args.dir / "summary.csv", newline="") as f:
        for row in csv.DictReader(f):
            key = (row["problem"], row["model"], row["scalarizer"])
            seen.add(key)
            lhds = cells.get(key, [])
            n = int(row["n_runs"])
            problems = []
            if n != len(lhds):
                problems.append(f"n_runs {n} vs {len(lhds)} files")
            if lhds:
                mean = statistics.fmean(lhds)
                std = statistics.stdev(lhds) if len(lhds) > 1 else 0.0
                if abs(mean - float(row["mean_lhd"])) > args.tol:
                    problems.append(f"mean {row['mean_lhd']} vs {mean}")
                if abs(std - float(row["std_lhd"])) > args.tol:
                    problems.append(f"std {row['std_lhd']} vs {std}")
            status = "ok" if not problems else "MISMATCH " + "; ".join(problems)
            print(f"{'/'.join(key)}: {status}")
            bad += bool(problems)

    for key in sorted(set(cells) - seen):
        print(f"{'/'.join(key)}: MISMATCH runs on disk but no summary row")
        bad += 1

    print(f"{bad} mismatching cells")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
