#!/usr/bin/env python3
"""Sweep oracle scorer quality and record model accuracy on the refined graph.

Two grids: filter-only oracles over p - q (p = (1+v)/2, q = (1-v)/2) and
add-only oracles over target precision p_pre. Accuracy should rise
monotonically along both.
"""

import argparse
import csv
import os
import sys

from lagraph.cli import load_config, run_oracle_sweep


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default=os.path.join("out", "sweeps"))
    ap.add_argument("--seeds", default="0,1,2,3,4")
    ap.add_argument("--values", default="0,0.2,0.4,0.6,0.8,1.0")
    args = ap.parse_args()

    seeds = [int(s) for s in args.seeds.split(",")]
    values = [float(v) for v in args.values.split(",")]
    code = 0
    for kind, short in (("p_minus_q", "pmq"), ("p_pre", "ppre")):
        cfg = load_config(None, args.output_dir,
                          {"seeds": seeds, "sweep": {"kind": kind, "values": values}})
        _, c = run_oracle_sweep(cfg)
        code = code or c
        with open(os.path.join(cfg.output_dir, f"sweep_{short}.csv"), newline="") as fh:
            rows = [r for r in csv.DictReader(fh)
                    if r["seed"] == "mean" and r["arm"] != "origin"]
        print(f"{kind} sweep (5-seed mean test acc):")
        for r in rows:
            print(f"  {r['arm']:<10} acc {float(r['acc_test']):.4f}")
    return code


if __name__ == "__main__":
    sys.exit(main())
