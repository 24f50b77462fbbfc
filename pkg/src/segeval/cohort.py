"""Cohort bookkeeping: age groups, patient-level splits and manifest CSVs."""
from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

GROUPS = ("P1", "P2", "P3", "adult")
SPLITS = ("train", "val", "test")
DEFAULT_RATIOS = (0.7, 0.1, 0.2)

# left-closed upper bounds in months: <24, <11 years, <18 years
_GROUP_BOUNDS = ((24, "P1"), (132, "P2"), (216, "P3"))

BASE_COLUMNS = ("case_id", "patient_id", "age_months", "dataset", "split", "group", "gt_path")
CASE_COLUMNS = ("case_id", "patient_id", "age_months")


class ManifestError(ValueError):
    """Malformed input rows; ``problems`` holds one message per bad line."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("\n".join(self.problems))


def assign_group(age_months):
    if age_months < 0:
        raise ValueError(f"age must be non-negative, got {age_months}")
    for bound, name in _GROUP_BOUNDS:
        if age_months < bound:
            return name
    return "adult"


@dataclass(frozen=True)
class CaseEntry:
    case_id: str
    patient_id: str
    age_months: int
    dataset: str = ""
    gt_path: str = ""
    preds: dict = field(default_factory=dict)
    split: str = ""
    group: str = ""

    def __post_init__(self):
        if not self.case_id:
            raise ValueError("case id must be non-empty")
        if not self.patient_id:
            raise ValueError(f"{self.case_id}: patient id must be non-empty")
        if self.age_months < 0:
            raise ValueError(f"{self.case_id}: negative age")
        if not self.group:
            object.__setattr__(self, "group", assign_group(self.age_months))


@dataclass(frozen=True)
class CohortManifest:
    entries: tuple
    model_ids: tuple = ()
    root: Path = Path(".")

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.model_ids:
            ids = []
            for e in self.entries:
                ids.extend(m for m in e.preds if m not in ids)
            object.__setattr__(self, "model_ids", tuple(ids))

    def resolve(self, rel):
        p = Path(rel)
        return p if p.is_absolute() else self.root / p

    def patients_by_split(self):
        out = {}
        for e in self.entries:
            out.setdefault(e.split, set()).add(e.patient_id)
        return out

    def counts(self, attr):
        out = {}
        for e in self.entries:
            key = getattr(e, attr)
            out[key] = out.get(key, 0) + 1
        return out


def apportion(total, ratios):
    """Largest-remainder apportionment of ``total`` items by ``ratios``."""
    quotas = [total * r for r in ratios]
    sizes = [math.floor(q + 1e-9) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[:total - sum(sizes)]:
        sizes[i] += 1
    return sizes


def split(manifest, ratios=DEFAULT_RATIOS, seed=0):
    """Shuffle patients with a seeded RNG and cut the shuffled list by the
    apportioned patient counts; all cases of a patient share one split."""
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != len(SPLITS) or min(ratios) <= 0 or abs(sum(ratios) - 1) > 1e-9:
        raise ValueError(f"ratios must be three positive numbers summing to 1, got {ratios}")
    patients = list(dict.fromkeys(e.patient_id for e in manifest.entries))
    if len(patients) < len(SPLITS):
        raise ValueError(f"{len(patients)} patient(s) cannot fill {len(SPLITS)} splits")
    sizes = apportion(len(patients), ratios)
    # every split with a positive ratio gets at least one patient
    for i, size in enumerate(sizes):
        if size == 0:
            sizes[sizes.index(max(sizes))] -= 1
            sizes[i] = 1
    random.Random(seed).shuffle(patients)
    assignment = {}
    start = 0
    for name, size in zip(SPLITS, sizes):
        for pid in patients[start:start + size]:
            assignment[pid] = name
        start += size
    entries = [replace(e, split=assignment[e.patient_id]) for e in manifest.entries]
    return replace(manifest, entries=tuple(entries))


def _parse_rows(text, required, source):
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        raise ManifestError([f"{source}: line 1: missing column(s) {', '.join(missing)}"])
    rows, problems = [], []
    for row in reader:
        line = reader.line_num
        if None in row or any(v is None for v in row.values()):
            problems.append(f"{source}: line {line}: wrong number of fields")
            continue
        rows.append((line, row))
    return header, rows, problems


def _entry_from_row(line, row, model_ids, source):
    try:
        age = int(row["age_months"])
    except ValueError:
        raise ManifestError([f"{source}: line {line}: age_months {row['age_months']!r} is not an integer"])
    try:
        return CaseEntry(
            case_id=row["case_id"].strip(), patient_id=row["patient_id"].strip(), age_months=age,
            dataset=row.get("dataset", "").strip(), gt_path=row.get("gt_path", "").strip(),
            preds={m: row[m].strip() for m in model_ids if row.get(m, "").strip()},
            split=row.get("split", "").strip(), group=row.get("group", "").strip(),
        )
    except ValueError as exc:
        raise ManifestError([f"{source}: line {line}: {exc}"])


def _read_entries(path, required):
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    header, rows, problems = _parse_rows(text, required, path)
    model_ids = tuple(c for c in header if c not in BASE_COLUMNS)
    entries, seen = [], set()
    for line, row in rows:
        try:
            entry = _entry_from_row(line, row, model_ids, path)
        except ManifestError as exc:
            problems.extend(exc.problems)
            continue
        if entry.case_id in seen:
            problems.append(f"{path}: line {line}: duplicate case_id {entry.case_id!r}")
            continue
        if entry.split and entry.split not in SPLITS:
            problems.append(f"{path}: line {line}: unknown split {entry.split!r}")
            continue
        if entry.group and entry.group not in GROUPS:
            problems.append(f"{path}: line {line}: unknown group {entry.group!r}")
            continue
        seen.add(entry.case_id)
        entries.append(entry)
    if problems:
        raise ManifestError(problems)
    return CohortManifest(tuple(entries), model_ids, path.parent)


def read_cases(path):
    """Case roster CSV: case_id, patient_id, age_months[, dataset, gt_path, <model ids>...]."""
    return _read_entries(path, CASE_COLUMNS)


def read_manifest(path):
    manifest = _read_entries(path, BASE_COLUMNS)
    problems = []
    for e in manifest.entries:
        if e.group != assign_group(e.age_months):
            problems.append(f"{path}: case {e.case_id}: group {e.group} contradicts age {e.age_months}")
    if problems:
        raise ManifestError(problems)
    return manifest


def manifest_csv(manifest):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BASE_COLUMNS + tuple(manifest.model_ids))
    for e in manifest.entries:
        writer.writerow([e.case_id, e.patient_id, e.age_months, e.dataset, e.split, e.group,
                         e.gt_path] + [e.preds.get(m, "") for m in manifest.model_ids])
    return buf.getvalue()


def write_manifest(manifest, path):
    Path(path).write_text(manifest_csv(manifest), encoding="utf-8", newline="\n")
