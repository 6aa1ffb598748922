#!/usr/bin/env python3
"""Run the synthetic benchmark: baseline-vs-refined pipeline plus the
filter/add ablation, five seeds each, at the default configuration.

Writes pipeline.csv and ablation.csv (plus timing sidecars and refinement
reports) under --output-dir and prints the headline numbers.
"""

import argparse
import csv
import os
import sys

from lagraph.cli import load_config, run_ablation, run_pipeline


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default=os.path.join("out", "benchmark"))
    ap.add_argument("--seeds", default="0,1,2,3,4")
    args = ap.parse_args()

    cfg = load_config(None, args.output_dir,
                      {"seeds": [int(s) for s in args.seeds.split(",")]})
    _, code1 = run_pipeline(cfg)
    _, code2 = run_ablation(cfg)

    for name in ("pipeline", "ablation"):
        path = os.path.join(cfg.output_dir, f"{name}.csv")
        with open(path, newline="") as fh:
            rows = [r for r in csv.DictReader(fh) if r["seed"] == "mean"]
        print(f"{name} (5-seed means):")
        for r in rows:
            print(f"  {r['arm']:<11} ratio {float(r['ratio_before']):.3f} -> "
                  f"{float(r['ratio_after']):.3f}   test acc {float(r['acc_test']):.4f}")
    return code1 or code2


if __name__ == "__main__":
    sys.exit(main())
