"""Distance-based metrics on mask contours: MLCD, Hausdorff, HD95 and ASSD."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imgproc import ContourSet, DistanceMap, distance_transform, extract_contour
from .overlap import check_same_shape


class EmptyContourError(ValueError):
    name = "empty contour"

    def __init__(self, msg=None):
        super().__init__(msg or self.name)


class EmptyGroundTruthContour(EmptyContourError):
    name = "empty ground-truth contour"


class EmptyPredictionContour(EmptyContourError):
    name = "empty prediction contour"


@dataclass(frozen=True)
class BoundaryPair:
    gt_contour: ContourSet
    pred_contour: ContourSet
    gt_distance_map: DistanceMap
    pred_distance_map: DistanceMap
    extractor: str = "canny"

    def gt_to_pred(self):
        """Distance from each GT contour pixel to the predicted contour."""
        return self.pred_distance_map.at(self.gt_contour.points)

    def pred_to_gt(self):
        return self.gt_distance_map.at(self.pred_contour.points)


def boundary_pair(gt, pred, extractor="canny", method="scipy", **extractor_kwargs):
    check_same_shape(gt, pred)
    gt_c = extract_contour(gt, extractor, **extractor_kwargs)
    if gt_c.empty:
        raise EmptyGroundTruthContour()
    pred_c = extract_contour(pred, extractor, **extractor_kwargs)
    if pred_c.empty:
        raise EmptyPredictionContour()
    return BoundaryPair(gt_c, pred_c, distance_transform(gt_c, method=method),
                        distance_transform(pred_c, method=method), extractor)


def mlcd(bp):
    """Mean of the GT-contour distance map over the predicted contour pixels.

    Not symmetric: the ground truth supplies the map and the prediction the samples.
    """
    return float(bp.pred_to_gt().mean())


def directed_hausdorff(a, b, map_b=None):
    """max over points of ``a`` of the distance to ``b``."""
    if a.empty or b.empty:
        raise EmptyContourError()
    if map_b is None:
        map_b = distance_transform(b)
    return float(map_b.at(a.points).max())


def hausdorff(bp):
    return float(max(bp.pred_to_gt().max(), bp.gt_to_pred().max()))


def percentile(values, q=95.0):
    """Linear interpolation between order statistics at rank q/100 * (n - 1)."""
    return float(np.percentile(np.asarray(values, dtype=np.float64), q, method="linear"))


def hd95(bp, q=95.0):
    """Max of the two directed 95th-percentile contour distances."""
    return max(percentile(bp.pred_to_gt(), q), percentile(bp.gt_to_pred(), q))


def assd(bp):
    d_pg = bp.pred_to_gt()
    d_gp = bp.gt_to_pred()
    return float((d_pg.sum() + d_gp.sum()) / (len(d_pg) + len(d_gp)))
