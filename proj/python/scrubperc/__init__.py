"""Python bindings for the floor-scrubber perception toolkit."""

from scrubperc._core import (
    AdaBoostModel,
    BoundingBox3D,
    Cluster,
    SvmModel,
    Tracker,
    adaboost_train,
    adaptive_cluster,
    chi2_threshold_2dof,
    cosine_similarity,
    detect_floor_objects,
    detection_metrics,
    dirt_block_scores,
    euclidean_cluster,
    extract_features,
    fit_gmm,
    generate_scene,
    human_candidate_extents,
    iou3d,
    load_cloud,
    noise_sigma,
    remove_planes,
    rgb_to_lab,
    roc_points,
    segment_scan,
    sequence_summary,
    svm_train,
    trajectory_heatmap,
    volumetric_filter,
    voxel_downsample,
)

__all__ = [
    "AdaBoostModel",
    "BoundingBox3D",
    "Cluster",
    "SvmModel",
    "Tracker",
    "adaboost_train",
    "adaptive_cluster",
    "chi2_threshold_2dof",
    "cosine_similarity",
    "detect_floor_objects",
    "detection_metrics",
    "dirt_block_scores",
    "euclidean_cluster",
    "extract_features",
    "fit_gmm",
    "generate_scene",
    "human_candidate_extents",
    "iou3d",
    "load_cloud",
    "noise_sigma",
    "remove_planes",
    "rgb_to_lab",
    "roc_points",
    "segment_scan",
    "sequence_summary",
    "svm_train",
    "trajectory_heatmap",
    "volumetric_filter",
    "voxel_downsample",
]
