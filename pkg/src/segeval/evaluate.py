"""Batch evaluation of manifests: per-case records, group reports and their
CSV/JSON/text renderings."""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import boundary, overlap, structural
from .ensemble import rank_models
from .imgproc import CANNY_HIGH, CANNY_LOW, CANNY_SIGMA
from .raster import ImageReadError, RasterError, load_image, resize
from .records import CSV_FIELDS, EvalRecord
from .stats import EmptyGroupError, aggregate, compare_models

CONFIG_ENV = "SEGEVAL_CONFIG"
CONFIG_SECTION = "segeval"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EvalConfig:
    """Every tunable of the evaluation; keys mirror the ``[segeval]`` config section."""

    threshold: float = 0.5
    resize: tuple | None = (224, 224)
    extractor: str = "canny"
    canny_sigma: float = CANNY_SIGMA
    canny_low: float = CANNY_LOW
    canny_high: float = CANNY_HIGH
    distance_method: str = "scipy"
    hd_percentile: float = 95.0
    percentile_method: str = "linear"
    ssim: structural.SsimConfig = field(default_factory=structural.SsimConfig)
    pooled: bool = False
    alpha: float = 0.05

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ConfigError("threshold must lie in (0, 1)")
        if self.extractor not in ("canny", "morph"):
            raise ConfigError(f"extractor must be canny or morph, not {self.extractor!r}")
        if self.distance_method not in ("scipy", "envelope"):
            raise ConfigError(f"unknown distance_method {self.distance_method!r}")
        if self.percentile_method != "linear":
            raise ConfigError("only the 'linear' percentile method is supported")
        if not 0 < self.hd_percentile <= 100:
            raise ConfigError("hd_percentile must lie in (0, 100]")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")

    def extractor_kwargs(self):
        if self.extractor == "canny":
            return {"sigma": self.canny_sigma, "low": self.canny_low, "high": self.canny_high}
        return {}

    def as_dict(self):
        out = asdict(self)
        out["resize"] = None if self.resize is None else list(self.resize)
        out["ssim"]["weights"] = list(self.ssim.weights)
        return out

    def digest(self):
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    @classmethod
    def from_file(cls, path):
        parser = configparser.ConfigParser()
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not parser.has_section(CONFIG_SECTION):
            raise ConfigError(f"{path}: missing [{CONFIG_SECTION}] section")
        return cls.from_mapping(dict(parser[CONFIG_SECTION]), source=str(path))

    @classmethod
    def from_mapping(cls, values, source="config"):
        values = dict(values)
        kwargs, ssim_kwargs = {}, {}
        try:
            for key in ("threshold", "canny_sigma", "canny_low", "canny_high", "hd_percentile", "alpha"):
                if key in values:
                    kwargs[key] = float(values.pop(key))
            for key in ("extractor", "distance_method", "percentile_method"):
                if key in values:
                    kwargs[key] = values.pop(key).strip()
            if "pooled" in values:
                kwargs["pooled"] = _parse_bool(values.pop("pooled"))
            if "resize" in values:
                kwargs["resize"] = _parse_size(values.pop("resize"))
            if "ssim_scales" in values:
                ssim_kwargs["scales"] = int(values.pop("ssim_scales"))
            if "ssim_weights" in values:
                ssim_kwargs["weights"] = tuple(float(w) for w in values.pop("ssim_weights").split(","))
            for key, name in (("ssim_window", "window"),):
                if key in values:
                    ssim_kwargs[name] = int(values.pop(key))
            for key, name in (("ssim_sigma", "sigma"), ("ssim_k1", "k1"), ("ssim_k2", "k2"),
                              ("dynamic_range", "dynamic_range")):
                if key in values:
                    ssim_kwargs[name] = float(values.pop(key))
            if values:
                raise ConfigError(f"{source}: unknown key(s) {', '.join(sorted(values))}")
            if "scales" in ssim_kwargs and "weights" not in ssim_kwargs:
                scales = ssim_kwargs.pop("scales")
                ssim = structural.SsimConfig.with_scales(scales, **ssim_kwargs)
            else:
                ssim = structural.SsimConfig(**ssim_kwargs)
            return cls(ssim=ssim, **kwargs)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{source}: {exc}") from None


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_size(text):
    t = text.strip().lower()
    if t in ("", "none", "off"):
        return None
    w, _, h = t.partition("x")
    return int(w), int(h)


def load_config(path=None):
    path = path or os.environ.get(CONFIG_ENV)
    return EvalConfig.from_file(path) if path else EvalConfig()


def _prepare(mask, cfg):
    if cfg.resize is not None and (mask.width, mask.height) != tuple(cfg.resize):
        mask = resize(mask, *cfg.resize)
    return mask


def evaluate_pair(gt, pred, cfg=EvalConfig(), case_id="", model_id="", group=""):
    """All seven metrics for one pair; failures are stored on the record."""
    rec = EvalRecord(case_id, model_id, group, extractor=cfg.extractor)
    gt = _prepare(gt, cfg)
    pred = _prepare(pred, cfg)
    try:
        counts = overlap.confusion(gt, pred)
    except overlap.ShapeMismatchError as exc:
        rec.errors["shape"] = str(exc)
        return rec
    rec.counts = counts
    rec.iou = overlap.iou(counts)
    rec.dice = overlap.dice(counts)
    rec.empty_pair = counts.both_empty

    try:
        ms = structural.msssim(gt, pred, cfg.ssim)
        rec.msssim = ms.msssim
        rec.clamp_count = ms.clamp_count
    except RasterError as exc:
        rec.errors["msssim"] = str(exc)

    scores = structural.ahs(gt, pred)
    rec.ahs = scores.ahs
    rec.ahs_norm = scores.ahs_normalized

    try:
        bp = boundary.boundary_pair(gt, pred, cfg.extractor, cfg.distance_method,
                                    **cfg.extractor_kwargs())
    except boundary.EmptyContourError as exc:
        for m in ("mlcd", "hd95", "assd"):
            rec.errors[m] = exc.name
    else:
        rec.mlcd = boundary.mlcd(bp)
        rec.hd95 = boundary.hd95(bp, cfg.hd_percentile)
        rec.assd = boundary.assd(bp)
    return rec


@dataclass(frozen=True)
class Task:
    case_id: str
    model_id: str
    group: str
    gt_path: str
    pred_path: str | None


def _run_task(task, cfg):
    if task.pred_path is None:
        return EvalRecord(task.case_id, task.model_id, task.group, extractor=cfg.extractor,
                          errors={"prediction": "no prediction listed"}), False
    try:
        gt = load_image(task.gt_path, "mask", cfg.threshold)
        pred = load_image(task.pred_path, "mask", cfg.threshold)
    except ImageReadError as exc:
        return EvalRecord(task.case_id, task.model_id, task.group, extractor=cfg.extractor,
                          errors={"io": str(exc)}), True
    return evaluate_pair(gt, pred, cfg, task.case_id, task.model_id, task.group), False


def _run_chunk(args):
    tasks, cfg = args
    return [_run_task(t, cfg) for t in tasks]


def build_tasks(manifest, model_ids=None, split=None):
    models = list(model_ids or manifest.model_ids)
    tasks = []
    for e in manifest.entries:
        if split and e.split != split:
            continue
        for m in models:
            pred = e.preds.get(m)
            tasks.append(Task(e.case_id, m, e.group, str(manifest.resolve(e.gt_path)),
                              None if pred is None else str(manifest.resolve(pred))))
    tasks.sort(key=lambda t: (t.group, t.model_id, t.case_id))
    return tasks


def run_tasks(tasks, cfg, jobs=1):
    """Evaluate tasks, possibly across processes; output order follows ``tasks``."""
    if jobs is None or jobs < 1:
        jobs = os.cpu_count() or 1
    if jobs == 1 or len(tasks) < 2:
        results = [_run_task(t, cfg) for t in tasks]
    else:
        size = max(1, -(-len(tasks) // (jobs * 4)))
        chunks = [(tasks[i:i + size], cfg) for i in range(0, len(tasks), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]
    records = [r for r, _ in results]
    io_failures = sum(1 for _, failed in results if failed)
    return records, io_failures


@dataclass(frozen=True)
class GroupReport:
    group: str
    summaries: dict
    ranking: tuple
    significance: dict
    missing: tuple = ()

    @property
    def n(self):
        return {m: s.n for m, s in self.summaries.items()}

    def as_dict(self):
        return {
            "group": self.group,
            "models": {m: s.as_dict() for m, s in self.summaries.items()},
            "ranking": list(self.ranking),
            "significance": self.significance,
            "unevaluable_models": list(self.missing),
        }


def group_reports(records, cfg=EvalConfig(), method="wald_clipped"):
    by_group = {}
    for r in records:
        by_group.setdefault(r.group, {}).setdefault(r.model_id, []).append(r)
    reports = []
    for group in sorted(by_group):
        summaries, missing = {}, []
        for model in sorted(by_group[group]):
            try:
                summaries[model] = aggregate(by_group[group][model], cfg.alpha, cfg.pooled)
            except EmptyGroupError:
                missing.append(model)
        ranking = tuple(rank_models({m: s.means["dice"] for m, s in summaries.items()}))
        sig = {}
        for a in ranking:
            sig[a] = {}
            for b in ranking:
                if a == b:
                    continue
                try:
                    c = compare_models(summaries[a], summaries[b], method, cfg.alpha)
                except ValueError:
                    sig[a][b] = None
                else:
                    sig[a][b] = {"z": c.z, "p": c.p, "significant": c.significant}
        reports.append(GroupReport(group, summaries, ranking, sig, tuple(missing)))
    return reports


def records_csv(records):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(r.to_row())
    return buf.getvalue()


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


TABLE_COLUMNS = ("Model", "n", "IoU", "Dice (CI)", "MS-SSIM", "MLCD", "AHS", "HD95", "ASSD", "Rank")


def render_table(reports):
    """Plain-text tables in the column order IoU | Dice (CI) | MS-SSIM | MLCD | AHS | HD95 | ASSD."""
    lines = []
    for rep in reports:
        rows = [TABLE_COLUMNS]
        rank = {m: i + 1 for i, m in enumerate(rep.ranking)}
        for model, s in rep.summaries.items():
            m = s.means
            ci = s.dice_wald
            rows.append((model, str(s.n), f"{m['iou']:.4f}",
                         f"{m['dice']:.4f} ({ci.lower:.4f},{ci.upper:.4f})",
                         f"{m['msssim']:.4f}", f"{m['mlcd']:.4f}", f"{m['ahs']:.4f}",
                         f"{m['hd95']:.4f}", f"{m['assd']:.4f}", str(rank[model])))
        widths = [max(len(r[i]) for r in rows) for i in range(len(TABLE_COLUMNS))]
        lines.append(f"Group {rep.group}")
        for r in rows:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        for model in rep.missing:
            lines.append(f"  {model}: no error-free records")
        lines.append("")
    return "\n".join(lines)


def write_reports(records, reports, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "records.csv").write_text(records_csv(records), encoding="utf-8")
    (out_dir / "records.json").write_text(dumps([r.to_json() for r in records]), encoding="utf-8")
    (out_dir / "groups.json").write_text(dumps([g.as_dict() for g in reports]), encoding="utf-8")
    (out_dir / "groups.txt").write_text(render_table(reports), encoding="utf-8")
