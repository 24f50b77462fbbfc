"""``segeval`` command line: evaluate | ensemble | qualitymap | split.

Exit codes: 0 success, 1 I/O failure, 2 configuration or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .cohort import DEFAULT_RATIOS, ManifestError, read_cases, read_manifest, split, write_manifest
from .ensemble import AlignmentError, bitwise_combine, load_prediction_dir, write_prediction_set
from .evaluate import ConfigError, build_tasks, dumps, group_reports, load_config, run_tasks, write_reports
from .raster import RasterError, load_image
from .structural import msssim, quality_map_png

EXIT_OK, EXIT_IO, EXIT_CONFIG = 0, 1, 2


def _err(msg):
    print(f"segeval: {msg}", file=sys.stderr)


def cmd_evaluate(args):
    try:
        cfg = load_config(args.config)
        if args.pooled:
            cfg = replace(cfg, pooled=True)
        manifest = read_manifest(args.manifest)
    except (ConfigError, ManifestError) as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except OSError as exc:
        _err(f"cannot read manifest: {exc}")
        return EXIT_IO
    models = [m for m in args.models.split(",") if m] if args.models else list(manifest.model_ids)
    unknown = [m for m in models if m not in manifest.model_ids]
    if unknown:
        _err(f"model(s) not in manifest: {', '.join(unknown)}")
        return EXIT_CONFIG
    start = time.perf_counter()
    tasks = build_tasks(manifest, models, None if args.split == "all" else args.split)
    records, io_failures = run_tasks(tasks, cfg, args.jobs)
    reports = group_reports(records, cfg)
    out = Path(args.out)
    try:
        write_reports(records, reports, out)
        meta = {
            "tool": "segeval", "version": __version__, "config_sha256": cfg.digest(),
            "config": cfg.as_dict(), "manifest": str(args.manifest), "models": models,
            "records": len(records), "io_failures": io_failures,
            "wall_time_s": round(time.perf_counter() - start, 3),
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        }
        (out / "run_metadata.json").write_text(dumps(meta), encoding="utf-8")
    except OSError as exc:
        _err(f"cannot write reports: {exc}")
        return EXIT_IO
    if io_failures:
        _err(f"{io_failures} case(s) could not be read; see records.csv")
        return EXIT_IO
    return EXIT_OK


def cmd_ensemble(args):
    try:
        sets = [load_prediction_dir(d, threshold=args.threshold) for d in args.dirs]
        combined = bitwise_combine(sets, args.op, label=args.label)
    except AlignmentError as exc:
        for p in exc.problems:
            _err(p)
        return EXIT_CONFIG
    except RasterError as exc:
        _err(str(exc))
        return EXIT_IO
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    try:
        write_prediction_set(combined, args.out, sources=[str(d) for d in args.dirs], op=args.op)
    except OSError as exc:
        _err(f"cannot write ensemble: {exc}")
        return EXIT_IO
    return EXIT_OK


def cmd_qualitymap(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    ssim_cfg = cfg.ssim
    if args.scales:
        ssim_cfg = type(ssim_cfg).with_scales(args.scales, window=ssim_cfg.window, sigma=ssim_cfg.sigma,
                                              k1=ssim_cfg.k1, k2=ssim_cfg.k2,
                                              dynamic_range=ssim_cfg.dynamic_range)
    try:
        gt = load_image(args.gt, "mask", cfg.threshold)
        pred = load_image(args.pred, "mask", cfg.threshold)
    except RasterError as exc:
        _err(str(exc))
        return EXIT_IO
    try:
        result = msssim(gt, pred, ssim_cfg)
    except RasterError as exc:
        _err(f"{exc}; rerun with --scales N")
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = []
        for j in range(1, result.scales + 1):
            name = f"scale_{j}.png"
            quality_map_png(result, j, out / name)
            files.append(name)
        summary = {
            "msssim": result.msssim,
            "scales": [{"scale": j + 1, "file": files[j], "width": m.width, "height": m.height,
                        "mean_ssim": result.scale_ssim[j], "mean_cs": result.scale_cs[j],
                        "weight": result.weights[j]} for j, m in enumerate(result.maps)],
            "structure_clamps": result.clamp_count,
        }
        (out / "qualitymap.json").write_text(dumps(summary), encoding="utf-8")
    except OSError as exc:
        _err(f"cannot write quality maps: {exc}")
        return EXIT_IO
    return EXIT_OK


def _parse_ratios(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios need three comma-separated values")
    return tuple(parts)


def cmd_split(args):
    try:
        cases = read_cases(args.cases)
        manifest = split(cases, args.ratios, args.seed)
    except ManifestError as exc:
        for p in exc.problems:
            _err(p)
        return EXIT_CONFIG
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    try:
        write_manifest(manifest, args.out)
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    counts = manifest.counts("split")
    print(json.dumps({"cases": len(manifest.entries), "splits": counts, "groups": manifest.counts("group")},
                     sort_keys=True))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="segeval", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"segeval {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="evaluate every manifest case against each model's prediction")
    ev.add_argument("manifest")
    ev.add_argument("--models", help="comma-separated model ids (default: all manifest model columns)")
    ev.add_argument("--config", help="INI file with a [segeval] section (default: $SEGEVAL_CONFIG)")
    ev.add_argument("--out", required=True)
    ev.add_argument("--split", default="all", choices=("all", "train", "val", "test"))
    ev.add_argument("--pooled", action="store_true", help="IoU/Dice group values from pooled counts")
    ev.add_argument("--jobs", type=int, default=0, help="worker processes (0 = all cores)")
    ev.set_defaults(func=cmd_evaluate)

    en = sub.add_parser("ensemble", help="bitwise AND/OR of aligned prediction directories")
    en.add_argument("dirs", nargs="+")
    en.add_argument("--op", choices=("and", "or"), required=True)
    en.add_argument("--out", required=True)
    en.add_argument("--label")
    en.add_argument("--threshold", type=float, default=0.5)
    en.set_defaults(func=cmd_ensemble)

    qm = sub.add_parser("qualitymap", help="per-scale MS-SSIM quality maps as Jet PNGs")
    qm.add_argument("gt")
    qm.add_argument("pred")
    qm.add_argument("--out", required=True)
    qm.add_argument("--config")
    qm.add_argument("--scales", type=int)
    qm.set_defaults(func=cmd_qualitymap)

    sp = sub.add_parser("split", help="assign age groups and patient-level splits")
    sp.add_argument("cases")
    sp.add_argument("--ratios", type=_parse_ratios, default=DEFAULT_RATIOS)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_split)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
