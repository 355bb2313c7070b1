#ifndef SCRUBBER_SEQUENCE_HPP
#define SCRUBBER_SEQUENCE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scrubber/frames.hpp"
#include "scrubber/geometry.hpp"

namespace scrubber {

enum class SensorId : uint8_t { lidar3d, rgbd_forward, rgbd_floor, laser2d };

const char* to_string(SensorId s);
SensorId sensor_id_from_string(const std::string& s);

/// Static description of one mounted sensor: rigid transform to the robot
/// base and mounting height above the floor.
struct SensorInfo {
  Eigen::Matrix4d extrinsics = Eigen::Matrix4d::Identity();  // base_T_sensor
  double height = 0.0;                                       // meters above floor
  std::optional<Intrinsics> intrinsics;                      // cameras only
};

/// Parsed manifest.json plus the frame file index.
struct SequenceManifest {
  std::map<SensorId, SensorInfo> sensors;

  struct FrameEntry {
    SensorId sensor = SensorId::lidar3d;
    double timestamp = 0.0;
    std::string cloud;  // clouds/NNNNNN.bin
    std::string depth;  // depth/NNNNNN.png
    std::string rgb;    // rgb/NNNNNN.png
    std::string scan;   // scan/NNNNNN.csv
  };
  std::vector<FrameEntry> frames;

  static SequenceManifest with_default_sensors();
};

/// One sensor frame with its decoded payload.
struct FrameRecord {
  SensorId sensor = SensorId::lidar3d;
  double timestamp = 0.0;
  std::optional<PointCloud3D> cloud;
  std::optional<DepthFrame> depth;
  std::optional<ColorFrame> rgb;
  std::optional<LaserScan2D> scan;
};

/// A whole recorded (or generated) sequence held in memory. Frame order is
/// globally timestamp-monotone across the heterogeneous sensors.
struct SequenceData {
  SequenceManifest manifest;
  std::vector<FrameRecord> frames;
  std::vector<Pose2D> poses;
};

/// Streaming reader; frames come back in global timestamp order. Payload
/// files are decoded lazily, one frame per next() call.
class SequenceReader {
 public:
  explicit SequenceReader(const std::string& directory);

  const SequenceManifest& manifest() const { return manifest_; }
  const std::vector<Pose2D>& poses() const { return poses_; }

  /// Robot pose interpolated (piecewise-constant, latest-not-after) at time t.
  Pose2D pose_at(double t) const;

  std::optional<FrameRecord> next();
  void reset() { cursor_ = 0; }
  size_t size() const { return manifest_.frames.size(); }

 private:
  std::string dir_;
  SequenceManifest manifest_;
  std::vector<Pose2D> poses_;
  size_t cursor_ = 0;
};

/// Loads an entire sequence eagerly.
SequenceData load_sequence(const std::string& directory);

/// Writes a sequence; load_sequence(save_sequence(x)) reproduces every
/// numeric payload bit-exactly (depth quantized to 1 mm by the format).
/// Rejects non-finite payloads and timestamp regressions.
void save_sequence(const SequenceData& data, const std::string& directory);

// Individual codecs (exposed for tools and tests).
PointCloud3D read_cloud_bin(const std::string& path);
void write_cloud_bin(const std::string& path, const PointCloud3D& cloud);
DepthFrame read_depth_png(const std::string& path, const Intrinsics& intrinsics);
void write_depth_png(const std::string& path, const DepthFrame& frame);
ColorFrame read_rgb_png(const std::string& path);
void write_rgb_png(const std::string& path, const ColorFrame& frame);
LaserScan2D read_scan_csv(const std::string& path);
void write_scan_csv(const std::string& path, const LaserScan2D& scan);
std::vector<Pose2D> read_poses_csv(const std::string& path);
void write_poses_csv(const std::string& path, const std::vector<Pose2D>& poses);

}  // namespace scrubber

#endif
