#ifndef SCRUBBER_GEOMETRY_HPP
#define SCRUBBER_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

namespace scrubber {

/// Single lidar return. Coordinates in meters, intensity in [0, 255].
struct Point3D {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float intensity = 0.0f;

  Eigen::Vector3d position() const { return {x, y, z}; }
};

enum class FrameId : uint8_t { sensor, world };

/// Timestamped point cloud, either in the emitting sensor's frame or in world frame.
struct PointCloud3D {
  std::vector<Point3D> points;
  double timestamp = 0.0;
  FrameId frame_id = FrameId::sensor;

  bool empty() const { return points.empty(); }
  size_t size() const { return points.size(); }
};

/// Registered RGB-D point (used by the camera-based leg detector).
struct ColoredPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  uint8_t r = 0, g = 0, b = 0;

  Eigen::Vector3d position() const { return {x, y, z}; }
};

struct ColoredCloud {
  std::vector<ColoredPoint> points;
  double timestamp = 0.0;

  bool empty() const { return points.empty(); }
  size_t size() const { return points.size(); }
};

/// Planar robot pose; theta normalized to (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double timestamp = 0.0;

  static double normalize_angle(double a) {
    a = std::fmod(a + M_PI, 2.0 * M_PI);
    if (a <= 0.0) a += 2.0 * M_PI;
    return a - M_PI;
  }

  Eigen::Isometry3d isometry() const {
    Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
    t.translate(Eigen::Vector3d(x, y, 0.0));
    t.rotate(Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()));
    return t;
  }
};

/// Axis-aligned box, center + full extents (w, d, h) in meters.
struct BoundingBox3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d extents = Eigen::Vector3d::Zero();  // (w, d, h)

  double width() const { return extents.x(); }
  double depth() const { return extents.y(); }
  double height() const { return extents.z(); }
  double volume() const { return extents.x() * extents.y() * extents.z(); }

  Eigen::Vector3d min() const { return center - 0.5 * extents; }
  Eigen::Vector3d max() const { return center + 0.5 * extents; }

  static BoundingBox3D from_min_max(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    BoundingBox3D b;
    b.center = 0.5 * (lo + hi);
    b.extents = hi - lo;
    return b;
  }
};

/// Fits a box tightly around a set of points; returns a zero box for empty input.
template <typename PointT>
BoundingBox3D bounding_box(const std::vector<PointT>& pts) {
  if (pts.empty()) return {};
  Eigen::Vector3d lo = pts.front().position();
  Eigen::Vector3d hi = lo;
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p.position());
    hi = hi.cwiseMax(p.position());
  }
  return BoundingBox3D::from_min_max(lo, hi);
}

}  // namespace scrubber

#endif
