#!/usr/bin/env python3
"""Write a synthetic lung-mask cohort (GT, per-model predictions, manifest.csv)."""
import argparse

from segeval.synthetic import write_synthetic_cohort


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--cases", type=int, default=30)
    ap.add_argument("--models", default="model_a,model_b,model_c")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--size", type=int, default=224)
    args = ap.parse_args()
    path = write_synthetic_cohort(args.out, args.cases, tuple(args.models.split(",")), args.seed, args.size)
    print(path)


if __name__ == "__main__":
    main()
