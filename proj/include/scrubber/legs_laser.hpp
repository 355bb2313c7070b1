#ifndef SCRUBBER_LEGS_LASER_HPP
#define SCRUBBER_LEGS_LASER_HPP

#include <string>
#include <vector>

#include "scrubber/detection.hpp"
#include "scrubber/frames.hpp"

namespace scrubber {

constexpr int kScanFeatureDim = 7;

/// Consecutive scan returns grouped by range continuity.
struct ScanSegment {
  std::vector<Eigen::Vector2d> points;  // scanner frame
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();

  // feature layout:
  //  0 beam count
  //  1 width (endpoint distance)
  //  2 circularity (mean squared residual to the Kasa circle fit)
  //  3 fitted radius (10 m sentinel for collinear segments)
  //  4 mean curvature over consecutive point triples
  //  5 mean speed (0 in single-frame mode)
  //  6 linearity (mean squared residual to the total-least-squares line)
  std::array<double, kScanFeatureDim> features{};
};

/// Splits a scan where the range jumps more than jump_threshold or returns
/// are invalid; segments with fewer than 3 points are dropped.
std::vector<ScanSegment> segment_scan(const LaserScan2D& scan, double jump_threshold = 0.15);

std::array<double, kScanFeatureDim> segment_features(const std::vector<Eigen::Vector2d>& points);

/// Two-frame mode: mean speed from per-point nearest neighbors in the
/// previous frame's points, displaced over dt.
std::array<double, kScanFeatureDim> segment_features(const std::vector<Eigen::Vector2d>& points,
                                                     const std::vector<Eigen::Vector2d>& previous,
                                                     double dt);

/// Discrete AdaBoost over decision stumps.
struct DecisionStump {
  int feature = 0;
  double threshold = 0.0;
  int polarity = +1;  // predict +1 when polarity * (x[feature] - threshold) > 0
  double weight = 0.0;
};

struct AdaBoostModel {
  std::vector<DecisionStump> stumps;
  double weight_sum() const {
    double s = 0;
    for (const auto& st : stumps) s += st.weight;
    return s;
  }
};

struct AdaBoostExample {
  std::vector<double> features;
  int label = 0;  // +1 / -1
};

/// Trains at most T rounds; stops early when no stump beats weighted error
/// 0.5 or the data is separated. Single-class input is an error.
AdaBoostModel adaboost_train(const std::vector<AdaBoostExample>& examples, int rounds = 50);

struct AdaBoostResult {
  int label = 0;
  double margin = 0.0;  // sum(alpha_t h_t) / sum(alpha_t), in [-1, 1]
};
AdaBoostResult adaboost_classify(const AdaBoostModel& model, const std::vector<double>& features);

void save_adaboost_model(const AdaBoostModel& model, const std::string& path);
AdaBoostModel load_adaboost_model(const std::string& path);

struct LaserLegParams {
  double jump_threshold = 0.15;
  double pairing_max = 0.8;       // meters between positive segment centroids
  double pair_confidence = 0.8;
  // an unpaired positive still yields a detection at half the pair confidence
  double position_sigma = 0.2;
};

/// Classify segments, merge nearby positives into leg-pair detections at the
/// midpoint, emit unpaired positives at the segment centroid with half
/// confidence. Scanner frame -> world via world_T_laser.
std::vector<Detection> detect_legs_2d(const LaserScan2D& scan, const AdaBoostModel& model,
                                      const LaserLegParams& params,
                                      const Eigen::Isometry3d& world_T_laser);

}  // namespace scrubber

#endif
