#!/usr/bin/env python3
"""Recompute every published Dice CI from (mean Dice, test-group size).

The printed bounds follow the clipped Wald interval; the Clopper-Pearson
column is shown next to it for contrast.
"""
import argparse
import csv
from pathlib import Path

from segeval.stats import clopper_pearson, wald_clipped

GROUP_N = {"P1": 11, "P2": 17, "P3": 11}
DEFAULT = Path(__file__).resolve().parent.parent / "tests" / "data" / "published_dice_cis.csv"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--table", type=Path, default=DEFAULT)
    ap.add_argument("--tol", type=float, default=1e-3)
    args = ap.parse_args()

    with args.table.open() as f:
        rows = list(csv.DictReader(f))
    print(f"{'grp':4} {'dice':>7} {'printed':>17} {'wald':>17} {'clopper-pearson':>17}  ok")
    hits = 0
    for r in rows:
        n = GROUP_N[r["group"]]
        dice = float(r["dice"])
        lo, hi = float(r["lower"]), float(r["upper"])
        w = wald_clipped(dice, n)
        cp = clopper_pearson(round(dice * n), n)
        ok = abs(w.lower - lo) <= args.tol and abs(w.upper - hi) <= args.tol
        hits += ok
        print(f"{r['group']:4} {dice:7.4f} ({lo:.4f},{hi:.4f}) ({w.lower:.4f},{w.upper:.4f}) "
              f"({cp.lower:.4f},{cp.upper:.4f})  {'yes' if ok else 'NO'}")
    print(f"\n{hits}/{len(rows)} intervals reproduced within {args.tol:g}")
    return 0 if hits == len(rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
