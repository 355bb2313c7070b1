#ifndef SCRUBBER_FLOOR_OBJECTS_HPP
#define SCRUBBER_FLOOR_OBJECTS_HPP

#include <cstdint>
#include <vector>

#include "scrubber/frames.hpp"
#include "scrubber/geometry.hpp"

namespace scrubber {

/// Floor surface: base plane n.p = d plus a quadratic in-plane sag
/// correction c1 u^2 + c2 v^2 + c3 uv (u, v are in-plane coordinates about
/// the inlier centroid). The normal points towards the camera.
struct FloorModel {
  Eigen::Vector3d normal = -Eigen::Vector3d::UnitZ();
  double offset = 0.0;
  Eigen::Vector3d in_plane_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d in_plane_v = Eigen::Vector3d::UnitY();
  Eigen::Vector3d plane_origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d curvature = Eigen::Vector3d::Zero();  // c1, c2, c3

  /// Signed height of p above the corrected surface (towards the camera).
  double height_above(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d rel = p - plane_origin;
    const double u = rel.dot(in_plane_u);
    const double v = rel.dot(in_plane_v);
    const double corr = curvature[0] * u * u + curvature[1] * v * v + curvature[2] * u * v;
    return normal.dot(p) - offset - corr;
  }
};

/// Structured-light axial noise: sigma(z) = s0 + s1 (z - z0)^2.
struct NoiseModel {
  double sigma0 = 0.0012;  // m
  double sigma1 = 0.0019;  // m^-1
  double z0 = 0.4;         // m
  double k = 3.0;          // threshold multiplier

  double sigma(double z) const { return sigma0 + sigma1 * (z - z0) * (z - z0); }
};

struct FloorFitParams {
  NoiseModel noise;
  int ransac_iterations = 200;
  uint64_t ransac_seed = 1;
  double min_inlier_fraction = 0.3;
  int min_valid_pixels = 100;
  double max_sag = 0.05;  // |c1| + |c2| + |c3| bound (meters over a 2 m span)
  bool fit_curvature = true;
};

// mask values in the exported PNG
constexpr uint8_t kMaskFloor = 0;
constexpr uint8_t kMaskUnknown = 128;
constexpr uint8_t kMaskObstacle = 255;

struct FloorFit {
  FloorModel model;
  std::vector<uint8_t> inlier_mask;  // 1 = floor inlier, row-major
  double inlier_fraction = 0.0;
  double plane_inlier_fraction = 0.0;  // before the curvature correction
};

/// RANSAC plane with per-point 3 sigma(z) thresholds, then a least-squares
/// quadratic correction over the plane inliers; the inlier mask is
/// recomputed against the corrected surface. Throws when fewer than
/// min_valid_pixels are valid or no plane reaches min_inlier_fraction.
FloorFit fit_floor(const DepthFrame& depth, const FloorFitParams& params = {});

struct ObjectDetection {
  std::vector<uint8_t> mask;  // kMaskFloor / kMaskUnknown / kMaskObstacle
  std::vector<BoundingBox3D> boxes;  // camera frame
  std::vector<int> pixel_counts;     // per box
};

struct ObjectDetectParams {
  NoiseModel noise;
  int min_component_pixels = 30;
};

/// Pixel is an obstacle iff it protrudes more than k sigma(z) above the
/// corrected floor; obstacle pixels are 8-connected into components.
ObjectDetection detect_objects(const DepthFrame& depth, const FloorModel& floor,
                               const ObjectDetectParams& params = {});

}  // namespace scrubber

#endif
