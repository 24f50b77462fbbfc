#!/usr/bin/env python3
"""Synthetic cohort -> evaluate -> AND ensemble of the top two models -> re-evaluate.

Also writes quality maps for the first case. Everything lands under OUT.
"""
import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from segeval.cli import main as segeval
from segeval.cohort import CohortManifest, read_manifest, write_manifest
from segeval.synthetic import write_synthetic_cohort


def run(*argv):
    code = segeval([str(a) for a in argv])
    if code:
        sys.exit(f"segeval {argv[0]} exited with {code}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=Path)
    ap.add_argument("--cases", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    manifest = write_synthetic_cohort(args.out / "cohort", args.cases, seed=args.seed)
    root = manifest.parent
    run("evaluate", manifest, "--out", args.out / "eval")

    # rank by Dice over all records and combine the best two
    groups = json.loads((args.out / "eval" / "groups.json").read_text())
    totals = {}
    for g in groups:
        for model, s in g["models"].items():
            totals.setdefault(model, []).append((s["means"]["dice"], s["n"]))
    mean = {m: sum(d * n for d, n in v) / sum(n for _, n in v) for m, v in totals.items()}
    top = sorted(mean, key=lambda m: (-mean[m], m))[:2]
    print("top-2 by Dice:", ", ".join(f"{m}={mean[m]:.4f}" for m in top))
    run("ensemble", *(root / m for m in top), "--op", "and", "--out", root / "ens_and")

    m = read_manifest(manifest)
    entries = [replace(e, preds={**e.preds, "ens_and": f"ens_and/{e.case_id}.png"}) for e in m.entries]
    ens_manifest = root / "manifest_ens.csv"
    write_manifest(CohortManifest(tuple(entries), m.model_ids + ("ens_and",), root), ens_manifest)
    run("evaluate", ens_manifest, "--out", args.out / "eval_ens")
    print((args.out / "eval_ens" / "groups.txt").read_text())

    first = m.entries[0]
    run("qualitymap", root / first.gt_path, root / first.preds[top[0]], "--out", args.out / "qualitymap")
    print("quality maps in", args.out / "qualitymap")


if __name__ == "__main__":
    main()
