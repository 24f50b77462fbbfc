"""Segmentation evaluation: overlap, structural and boundary metrics, bitwise
ensembles and binomial CI statistics over cohorts of mask pairs."""

__version__ = "0.1.0"

from .boundary import (BoundaryPair, EmptyGroundTruthContour, EmptyPredictionContour, assd,
                       boundary_pair, directed_hausdorff, hausdorff, hd95, mlcd)
from .cohort import CaseEntry, CohortManifest, assign_group, split
from .ensemble import PredictionSet, bitwise_combine, ensemble_of_ensembles, rank_models
from .imgproc import (ContourSet, DistanceMap, canny_contour, dct2, distance_transform,
                      gaussian_downsample2x, haar_dwt2, morph_boundary)
from .overlap import ConfusionCounts, confusion, dice, iou
from .raster import BinaryMask, GrayImage, binarize, load_image, resize, write_png
from .records import EvalRecord
from .stats import CiResult, aggregate, clopper_pearson, compare_models, p_from_ci, wald_clipped
from .structural import (HashCode, HashScores, SsimConfig, SsimResult, ahs, image_hash, msssim,
                         quality_map_png, ssim_map)
