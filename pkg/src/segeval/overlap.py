"""Pixel-based metrics: confusion counts, IoU and Dice."""
from dataclasses import dataclass

import numpy as np


class ShapeMismatchError(ValueError):
    pass


def check_same_shape(a, b, what="masks"):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{what} differ in size: {a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    @property
    def both_empty(self):
        """Neither mask has foreground; IoU and Dice are then defined as 1."""
        return self.tp + self.fp + self.fn == 0

    def __add__(self, other):
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


def confusion(gt, pred):
    check_same_shape(gt, pred)
    g = gt.as_bool()
    p = pred.as_bool()
    tp = int(np.count_nonzero(g & p))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(g & ~p))
    return ConfusionCounts(tp, fp, fn, g.size - tp - fp - fn)


def iou(c):
    if c.both_empty:
        return 1.0
    return c.tp / (c.tp + c.fp + c.fn)


def dice(c):
    if c.both_empty:
        return 1.0
    return 2 * c.tp / (2 * c.tp + c.fp + c.fn)


def dice_from_iou(j):
    return 2 * j / (1 + j)


def pooled(counts):
    """Sum per-image counts so IoU/Dice can be taken over the whole group."""
    total = ConfusionCounts(0, 0, 0, 0)
    for c in counts:
        total = total + c
    return total
