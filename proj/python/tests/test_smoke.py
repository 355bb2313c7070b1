"""Smoke tests for the scrubperc python module."""

import math

import numpy as np
import pytest

import scrubperc as sp


def test_cosine_similarity_reference_value():
    assert sp.cosine_similarity([1, 2, 3], [4, 5, 6]) == pytest.approx(
        0.9746318461970762, abs=1e-12
    )
    with pytest.raises(Exception):
        sp.cosine_similarity([0, 0], [1, 0])


def test_iou3d_unit_cubes():
    a = sp.BoundingBox3D(center=(0, 0, 0), extents=(1, 1, 1))
    b = sp.BoundingBox3D(center=(0.5, 0, 0), extents=(1, 1, 1))
    assert sp.iou3d(a, b) == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert sp.iou3d(a, a) == 1.0


def test_voxel_and_clustering():
    rng = np.random.default_rng(3)
    blob1 = rng.normal([0, 0, 1, 100], 0.05, size=(40, 4)).astype(np.float32)
    blob2 = rng.normal([5, 0, 1, 100], 0.05, size=(40, 4)).astype(np.float32)
    cloud = np.vstack([blob1, blob2])
    down = sp.voxel_downsample(cloud, 0.02)
    assert down.shape[1] == 4
    clusters = sp.euclidean_cluster(cloud, tolerance=0.5, min_size=5)
    assert len(clusters) == 2
    assert sp.human_candidate_extents((0.5, 0.5, 1.7))
    assert not sp.human_candidate_extents((1.5, 0.5, 1.7))


def test_feature_vector_is_71_dimensional():
    rng = np.random.default_rng(5)
    cloud = rng.uniform([-1, -1, 0, 0], [1, 1, 1.7, 255], size=(120, 4)).astype(np.float32)
    features = sp.extract_features(cloud)
    assert features.shape == (71,)
    assert np.all(np.isfinite(features))
    assert features[0] == 120  # point count
    # intensity histogram block sums to 1
    assert features[36:61].sum() == pytest.approx(1.0, abs=1e-9)


def test_svm_train_and_predict():
    rng = np.random.default_rng(7)
    neg = rng.normal([0, 0], 1.0, size=(60, 2))
    pos = rng.normal([4, 4], 1.0, size=(60, 2))
    features = [list(v) for v in np.vstack([neg, pos])]
    labels = [-1] * 60 + [1] * 60
    model = sp.svm_train(features, labels, grid_c=[1.0, 10.0], grid_gamma=[0.1, 1.0], folds=5)
    label, prob = model.predict([4.0, 4.0])
    assert label == 1 and prob > 0.8
    label, prob = model.predict([0.0, 0.0])
    assert label == -1 and prob < 0.2


def test_adaboost_roundtrip(tmp_path):
    features = [[0.0], [0.2], [0.8], [1.0]]
    labels = [-1, -1, 1, 1]
    model = sp.adaboost_train(features, labels, rounds=5)
    assert model.classify([0.9])[0] == 1
    path = str(tmp_path / "legs.json")
    model.save(path)
    loaded = sp.AdaBoostModel.load(path)
    assert loaded.classify([0.1])[0] == -1


def test_tracker_confirms_after_three_hits():
    tracker = sp.Tracker(confirm_hits=3)
    assert tracker.step([(1.0, 1.0, "lidar3d")], 0.0) == []
    assert tracker.step([(1.0, 1.0, "lidar3d")], 0.1) == []
    tracks = tracker.step([(1.0, 1.0, "lidar3d")], 0.2)
    assert len(tracks) == 1
    assert tracks[0]["x"] == pytest.approx(1.0, abs=0.05)


def test_gate_threshold_closed_form():
    assert sp.chi2_threshold_2dof(0.95) == pytest.approx(-2.0 * math.log(0.05), abs=1e-12)


def test_rgb_to_lab_white():
    white = np.full((2, 2, 3), 255, dtype=np.uint8)
    lab = sp.rgb_to_lab(white)
    assert lab[0, 0, 0] == pytest.approx(100.0, abs=0.01)
    assert abs(lab[0, 0, 1]) < 0.01 and abs(lab[0, 0, 2]) < 0.01


def test_noise_sigma_values():
    assert sp.noise_sigma(0.4) == pytest.approx(0.0012)
    assert sp.noise_sigma(1.4) == pytest.approx(0.0031, abs=1e-12)


def test_fit_gmm_single_component():
    rng = np.random.default_rng(9)
    samples = rng.normal([2.0, -1.0], 0.3, size=(400, 2))
    comps = sp.fit_gmm(samples, components=1, seed=3)
    assert len(comps) == 1
    assert comps[0]["weight"] == pytest.approx(1.0)
    assert np.allclose(comps[0]["mean"], samples.mean(axis=0), atol=1e-6)


def test_detection_metrics_perfect():
    box = sp.BoundingBox3D(center=(0, 0, 0.85), extents=(0.5, 0.5, 1.7))
    metrics = sp.detection_metrics([(box, 0.9, 0)], [(box, 0)])
    assert metrics["precision"] == 1.0
    assert metrics["recall"] == 1.0
    assert metrics["f1"] == 1.0


def test_roc_perfect_separation():
    points, auc = sp.roc_points([-30.0, -31.0, -5.0, -6.0], [1, 1, 0, 0])
    assert auc == pytest.approx(1.0)
    assert points[0, 0] == 0.0 and points[-1, 1] == 1.0


def test_floor_objects_on_synthetic_depth():
    h, w = 120, 160
    fx = fy = 140.0
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    rng = np.random.default_rng(11)
    depth = np.full((h, w), 1.2, dtype=np.float32)
    depth += rng.normal(0, 0.002, size=depth.shape).astype(np.float32)
    # a 3 cm box near the image center
    depth[50:70, 70:95] = 1.17
    result = sp.detect_floor_objects(depth, fx, fy, cx, cy, seed=2)
    assert result["floor_inlier_fraction"] > 0.9
    assert len(result["boxes"]) == 1
    assert result["mask"].shape == (h, w)


def test_dirt_block_scores_flags_the_odd_block():
    rng = np.random.default_rng(13)
    h, w = 96, 128
    rgb = np.full((h, w, 3), 140, dtype=np.uint8)
    rgb = (rgb + rng.normal(0, 1.5, size=rgb.shape)).clip(0, 255).astype(np.uint8)
    # one noisy dark blob
    rgb[40:56, 64:80] = (
        rgb[40:56, 64:80].astype(int) - 50 + rng.normal(0, 12, size=(16, 16, 3))
    ).clip(0, 255).astype(np.uint8)
    ones = np.ones((h, w), dtype=np.uint8)
    zeros = np.zeros((h, w), dtype=np.uint8)
    scores, mask = sp.dirt_block_scores(rgb, ones, zeros, block_size=16, percentile=5.0)
    assert scores.shape == (h // 16, w // 16)
    # every flagged block touches the blob (blob rows 2-3, boundary cols 3-5)
    flagged = np.argwhere(mask > 0)
    assert len(flagged) > 0
    for row, col in flagged:
        assert 2 <= row <= 3 and 3 <= col <= 5


def test_scene_generation_roundtrip(tmp_path):
    path = str(tmp_path / "seq")
    sp.generate_scene(path, seed=3, walkers=[(2.0, 0.5, 0.0, 0.0)], duration=0.3)
    summary = sp.sequence_summary(path)
    assert summary["frames"] > 0
    assert "lidar3d" in summary["sensors"]
    cloud = sp.load_cloud(path + "/clouds/000000.bin")
    assert cloud.shape[1] == 4
    assert len(cloud) > 100


def test_segment_scan_splits_on_jumps():
    ranges = [2.0] * 30 + [3.0] * 30
    segments = sp.segment_scan(0.0, 0.01, ranges, range_max=10.0)
    assert len(segments) == 2
    points, features = segments[0]
    assert features[0] == 30  # beam count
