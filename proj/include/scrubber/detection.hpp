#ifndef SCRUBBER_DETECTION_HPP
#define SCRUBBER_DETECTION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace scrubber {

/// Which detector produced a Detection. Upper-body detections are accepted on
/// the wire even though the template detector itself is external.
enum class DetectionSource : uint8_t { lidar3d, rgbd_upper_body, rgbd_legs, laser_legs };

inline const char* to_string(DetectionSource s) {
  switch (s) {
    case DetectionSource::lidar3d: return "lidar3d";
    case DetectionSource::rgbd_upper_body: return "rgbd_upper_body";
    case DetectionSource::rgbd_legs: return "rgbd_legs";
    case DetectionSource::laser_legs: return "laser_legs";
  }
  return "unknown";
}

inline DetectionSource detection_source_from_string(const std::string& s) {
  if (s == "lidar3d") return DetectionSource::lidar3d;
  if (s == "rgbd_upper_body") return DetectionSource::rgbd_upper_body;
  if (s == "rgbd_legs") return DetectionSource::rgbd_legs;
  if (s == "laser_legs") return DetectionSource::laser_legs;
  throw std::invalid_argument("unknown detection source: " + s);
}

/// Sensor-agnostic person observation on the ground plane, in world frame.
/// The common currency every detector feeds to the tracker.
struct Detection {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();  // world frame, meters
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
  DetectionSource source = DetectionSource::lidar3d;
  double confidence = 1.0;  // [0, 1]
  double timestamp = 0.0;
};

}  // namespace scrubber

#endif
