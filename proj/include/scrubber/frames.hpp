#ifndef SCRUBBER_FRAMES_HPP
#define SCRUBBER_FRAMES_HPP

#include <cstdint>
#include <vector>

#include "scrubber/geometry.hpp"

namespace scrubber {

/// Pinhole intrinsics in pixels.
struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Depth image in meters, row-major, 0 = invalid return.
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<float> depth;  // meters
  Intrinsics intrinsics;
  double timestamp = 0.0;

  float at(int u, int v) const { return depth[static_cast<size_t>(v) * width + u]; }
  float& at(int u, int v) { return depth[static_cast<size_t>(v) * width + u]; }

  /// Back-projects pixel (u, v) with its stored depth into the camera frame.
  Eigen::Vector3d unproject(int u, int v) const {
    const double z = at(u, v);
    return {(u - intrinsics.cx) * z / intrinsics.fx, (v - intrinsics.cy) * z / intrinsics.fy, z};
  }
};

/// 8-bit RGB image, row-major interleaved.
struct ColorFrame {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> rgb;  // 3 * width * height
  double timestamp = 0.0;

  const uint8_t* pixel(int u, int v) const { return &rgb[3 * (static_cast<size_t>(v) * width + u)]; }
  uint8_t* pixel(int u, int v) { return &rgb[3 * (static_cast<size_t>(v) * width + u)]; }
};

struct ColoredCloud;

/// Back-projects a registered depth/color pair into a colored cloud and maps
/// it through T (e.g. base_T_camera). Invalid depth pixels are skipped.
ColoredCloud make_registered_cloud(const DepthFrame& depth, const ColorFrame& rgb,
                                   const Eigen::Matrix4d& T);

/// Planar laser scan. Beam i is at angle_min + i * angle_increment; ranges in meters.
struct LaserScan2D {
  double angle_min = 0.0;
  double angle_increment = 0.0;
  std::vector<double> ranges;
  double range_max = 30.0;
  double timestamp = 0.0;

  double angle(size_t i) const { return angle_min + static_cast<double>(i) * angle_increment; }

  /// Beam endpoint in the scanner frame; call only for valid returns.
  Eigen::Vector2d point(size_t i) const {
    const double a = angle(i);
    return {ranges[i] * std::cos(a), ranges[i] * std::sin(a)};
  }

  bool valid(size_t i) const { return ranges[i] > 0.0 && ranges[i] < range_max; }
};

}  // namespace scrubber

#endif
