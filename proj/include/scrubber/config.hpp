#ifndef SCRUBBER_CONFIG_HPP
#define SCRUBBER_CONFIG_HPP

#include <set>
#include <string>

#include "scrubber/dirt.hpp"
#include "scrubber/floor_objects.hpp"
#include "scrubber/legs_laser.hpp"
#include "scrubber/legs_rgbd.hpp"
#include "scrubber/svm.hpp"
#include "scrubber/tracking.hpp"

namespace scrubber {

struct DirtParams {
  int block_size = 16;
  int gmm_components = 3;  // 1..8
  uint64_t seed = 1;
  DirtThreshold threshold;
  int median_window = 5;
  double cell_size = 0.05;  // world registration cells for the median filter
};

struct AnalyticsParams {
  double heatmap_cell = 0.2;
  double iou_threshold = 0.5;
};

/// Everything the CLI needs: one JSON file with per-module sections. Any
/// missing key keeps its default; dump() writes the effective config back.
struct PipelineConfig {
  ClusteringParams clustering;
  HumanDetectorParams human;  // shares `clustering` on load
  std::string svm_model_path;
  RgbdLegParams rgbd_legs;
  LaserLegParams laser_legs;
  std::string legs_model_path;
  TrackerConfig tracker;
  FloorFitParams object_fit;
  ObjectDetectParams object_detect;
  DirtParams dirt;
  AnalyticsParams analytics;
  std::set<DetectionSource> enabled_detectors = {DetectionSource::lidar3d};

  static PipelineConfig load(const std::string& path);
  static PipelineConfig from_json_text(const std::string& text);
  std::string dump() const;
  void save(const std::string& path) const;
};

}  // namespace scrubber

#endif
