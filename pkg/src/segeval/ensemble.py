"""Bitwise AND/OR ensembles of binarized predictions and Dice-based model ranking."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .raster import BinaryMask, load_image, write_png

MASK_SUFFIXES = (".png", ".pgm")


class AlignmentError(ValueError):
    """Prediction sets that cannot be combined; ``problems`` lists every mismatch."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class PredictionSet:
    model_id: str
    masks: dict

    def __post_init__(self):
        object.__setattr__(self, "masks", dict(sorted(self.masks.items())))

    @property
    def case_ids(self):
        return tuple(self.masks)

    def __len__(self):
        return len(self.masks)


def check_alignment(sets):
    if not sets:
        raise AlignmentError(["no prediction sets given"])
    ref = sets[0]
    problems = []
    for s in sets[1:]:
        missing = sorted(set(ref.masks) - set(s.masks))
        extra = sorted(set(s.masks) - set(ref.masks))
        if missing:
            problems.append(f"{s.model_id}: missing cases {', '.join(missing)}")
        if extra:
            problems.append(f"{s.model_id}: unexpected cases {', '.join(extra)}")
        for case in sorted(set(ref.masks) & set(s.masks)):
            if s.masks[case].shape != ref.masks[case].shape:
                problems.append(f"{s.model_id}/{case}: shape {s.masks[case].shape} "
                                f"!= {ref.masks[case].shape} in {ref.model_id}")
    if problems:
        raise AlignmentError(problems)


def bitwise_combine(sets, op="and", label=None):
    op = op.lower()
    if op not in ("and", "or"):
        raise ValueError(f"op must be 'and' or 'or', not {op!r}")
    sets = list(sets)
    check_alignment(sets)
    reduce = np.logical_and.reduce if op == "and" else np.logical_or.reduce
    combined = {
        case: BinaryMask(reduce([s.masks[case].as_bool() for s in sets]))
        for case in sets[0].case_ids
    }
    if label is None:
        label = f"{op.upper()}({','.join(s.model_id for s in sets)})"
    return PredictionSet(label, combined)


def ensemble_of_ensembles(e2, e3, op="and"):
    """Second-stage combination of two already-ensembled prediction sets."""
    return bitwise_combine([e2, e3], op, label=f"{op.upper()}[{e2.model_id} | {e3.model_id}]")


def rank_models(scores):
    """Model ids by descending mean Dice; equal scores fall back to id order."""
    items = dict(scores).items()
    for model, score in items:
        if score is None or math.isnan(score):
            raise ValueError(f"score for {model!r} is NaN")
    return [m for m, _ in sorted(items, key=lambda kv: (-kv[1], kv[0]))]


def top_k(scores, k):
    return rank_models(scores)[:k]


def load_prediction_dir(path, model_id=None, threshold=0.5):
    """One mask per file; the case id is the filename stem."""
    path = Path(path)
    masks = {}
    for f in sorted(path.iterdir()):
        if f.suffix.lower() in MASK_SUFFIXES and f.is_file():
            if f.stem in masks:
                raise AlignmentError([f"{path}: duplicate case id {f.stem!r}"])
            masks[f.stem] = load_image(f, kind="mask", threshold=threshold)
    return PredictionSet(model_id or path.name, masks)


def write_prediction_set(pset, out_dir, sources=(), op=None):
    """Write masks as ``<case>.png`` and a provenance JSON next to them."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for case, mask in pset.masks.items():
        write_png(mask, out_dir / f"{case}.png")
    provenance = {
        "model_id": pset.model_id,
        "op": op,
        "sources": list(sources),
        "cases": list(pset.case_ids),
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    (out_dir / "provenance.json").write_text(json.dumps(provenance, indent=2) + "\n")
    return out_dir
