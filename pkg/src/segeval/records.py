"""Per-case evaluation record shared by the statistics and reporting layers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .overlap import ConfusionCounts

METRICS = ("iou", "dice", "msssim", "mlcd", "ahs", "ahs_norm", "hd95", "assd")
BOUNDED = ("iou", "dice", "msssim", "ahs_norm")

CSV_FIELDS = (
    "group", "model_id", "case_id", *METRICS,
    "tp", "fp", "fn", "tn", "empty_pair", "clamp_count", "extractor", "errors",
)


@dataclass
class EvalRecord:
    case_id: str
    model_id: str
    group: str = ""
    iou: Optional[float] = None
    dice: Optional[float] = None
    msssim: Optional[float] = None
    mlcd: Optional[float] = None
    ahs: Optional[float] = None
    ahs_norm: Optional[float] = None
    hd95: Optional[float] = None
    assd: Optional[float] = None
    counts: Optional[ConfusionCounts] = None
    empty_pair: bool = False
    clamp_count: int = 0
    extractor: str = "canny"
    errors: dict = field(default_factory=dict)

    @property
    def ok(self):
        return not self.errors

    def metrics(self):
        return {m: getattr(self, m) for m in METRICS}

    def sort_key(self):
        return (self.group, self.model_id, self.case_id)

    def to_row(self):
        c = self.counts
        row = {"group": self.group, "model_id": self.model_id, "case_id": self.case_id}
        for m in METRICS:
            v = getattr(self, m)
            row[m] = "" if v is None else repr(float(v))
        for name in ("tp", "fp", "fn", "tn"):
            row[name] = "" if c is None else getattr(c, name)
        row["empty_pair"] = int(self.empty_pair)
        row["clamp_count"] = self.clamp_count
        row["extractor"] = self.extractor
        row["errors"] = ";".join(f"{k}: {v}" for k, v in sorted(self.errors.items()))
        return row

    def to_json(self):
        out = {"group": self.group, "model_id": self.model_id, "case_id": self.case_id}
        out.update(self.metrics())
        out["counts"] = None if self.counts is None else {
            "tp": self.counts.tp, "fp": self.counts.fp, "fn": self.counts.fn, "tn": self.counts.tn}
        out["flags"] = {"empty_pair": self.empty_pair, "clamp_count": self.clamp_count,
                        "extractor": self.extractor}
        out["errors"] = dict(sorted(self.errors.items()))
        return out
