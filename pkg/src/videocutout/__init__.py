"""Interactive video object cutout.

Propagates a handful of human-annotated masks over a whole video with
pyramid-histogram and geodesic confidence maps plus uncertainty-gated
local window classifiers, and recommends which frames to annotate by
minimizing a predicted propagation-error objective.
"""

from .config import RunConfig
from .data import AnnotationSet, Mask, VideoSequence
from .io import load_mask, load_sequence, save_mask
from .superpixel import SlicSegmenter, SuperpixelMap, slic_segment, superpixel_labels
from .confidence import (
    PyramidClassifier,
    PyramidModel,
    build_interframe_graph,
    build_pyramid_model,
    coarse_mask,
    combine_confidence,
    dynamic_confidence,
    geodesic_distance_field,
    rasterize_confidence,
    static_confidence,
)
from .refine import (
    enabled_windows,
    fill_holes,
    fuse_masks,
    local_classify,
    match_window,
    match_windows,
    merge_bidirectional,
    partition_certainty,
    propagation_uncertainty,
)
from .frameselect import (
    FrameSelector,
    accumulate_error,
    adjustment_coefficient,
    frame_descriptor,
    match_superpixels,
    mislabel_probability,
    propagation_error_matrix,
    select_frames,
    selection_objective,
)
from .metrics import EvalReport, contour_accuracy, jumpcut_error, region_similarity
from .pipeline import CutoutSession, SelectiveVideoCutout, benchmark, propagate, recommend

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "CutoutSession",
    "EvalReport",
    "FrameSelector",
    "Mask",
    "PyramidClassifier",
    "PyramidModel",
    "RunConfig",
    "SelectiveVideoCutout",
    "SlicSegmenter",
    "SuperpixelMap",
    "VideoSequence",
    "accumulate_error",
    "adjustment_coefficient",
    "benchmark",
    "build_interframe_graph",
    "build_pyramid_model",
    "coarse_mask",
    "combine_confidence",
    "contour_accuracy",
    "dynamic_confidence",
    "enabled_windows",
    "fill_holes",
    "frame_descriptor",
    "fuse_masks",
    "geodesic_distance_field",
    "jumpcut_error",
    "load_mask",
    "load_sequence",
    "local_classify",
    "match_superpixels",
    "match_window",
    "match_windows",
    "merge_bidirectional",
    "mislabel_probability",
    "partition_certainty",
    "propagate",
    "propagation_error_matrix",
    "propagation_uncertainty",
    "rasterize_confidence",
    "recommend",
    "region_similarity",
    "save_mask",
    "select_frames",
    "selection_objective",
    "slic_segment",
    "static_confidence",
    "superpixel_labels",
]
