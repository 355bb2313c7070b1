#ifndef SCRUBBER_ANALYTICS_HPP
#define SCRUBBER_ANALYTICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scrubber/geometry.hpp"

namespace scrubber {

/// 2D grid of normalized event frequency. Raw counts are kept alongside the
/// [0, 1] normalization; cells never observed are distinguishable from clean.
class HeatmapGrid {
 public:
  HeatmapGrid(double origin_x, double origin_y, double cell_size, int width, int height);

  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double cell_size() const { return cell_size_; }
  int width() const { return width_; }
  int height() const { return height_; }

  bool contains(double x, double y) const;
  std::pair<int, int> cell_of(double x, double y) const;

  double count(int cx, int cy) const { return counts_[index(cx, cy)]; }
  bool observed(int cx, int cy) const { return observed_[index(cx, cy)]; }
  void add(double x, double y, double amount = 1.0);
  void set(double x, double y, double value);  // marks observed, overwrites

  double max_count() const;
  /// count / max_count, in [0, 1]; zero grid stays zero.
  double normalized(int cx, int cy) const;

  /// CSV: one row per grid row, raw counts; unobserved cells print as -1
  /// when the distinction is on.
  std::string to_csv(bool mark_unobserved = false) const;
  /// Colormapped PNG (dark blue -> yellow); unobserved cells gray.
  void write_png(const std::string& path, bool mark_unobserved = false) const;

 private:
  size_t index(int cx, int cy) const { return static_cast<size_t>(cy) * width_ + cx; }
  double origin_x_, origin_y_, cell_size_;
  int width_, height_;
  std::vector<double> counts_;
  std::vector<uint8_t> observed_;
};

struct GridSpec {
  double cell_size = 0.2;
  // when unset the grid auto-fits the data with one cell of margin
  std::optional<double> origin_x, origin_y;
  std::optional<int> width, height;
};

/// Each trajectory increments a cell at most once (trajectory-count
/// semantics); optional dwell mode counts every sample instead.
HeatmapGrid trajectory_heatmap(const std::vector<std::vector<Eigen::Vector2d>>& trajectories,
                               const GridSpec& spec, bool dwell_time_mode = false);

/// First-observation-wins dirt map: per cell, the first (dirt?) observation
/// of the mission sticks; later ones are ignored.
struct DirtObservation {
  double x = 0.0, y = 0.0;
  bool dirt = false;
};
HeatmapGrid dirt_heatmap(const std::vector<std::vector<DirtObservation>>& frames,
                         const GridSpec& spec);

/// Exact closed-form IoU of axis-aligned boxes.
double iou3d(const BoundingBox3D& a, const BoundingBox3D& b);

struct ScoredPrediction {
  BoundingBox3D box;
  double score = 0.0;
  int frame = 0;
};
struct GroundTruthBox {
  BoundingBox3D box;
  int frame = 0;
};

struct DetectionMetrics {
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  int true_negatives = 0;  // meaningful only when negatives were supplied
  double precision = 0.0;
  bool precision_defined = true;
  double recall = 0.0;
  double f1 = 0.0;
  double average_precision = 0.0;
  std::optional<double> accuracy;  // needs a negative-candidate count
};

/// Greedy per-frame matching by descending score at the IoU threshold; AP by
/// all-point interpolation over the pooled PR curve. negative_candidates is
/// the count of correctly rejected cluster candidates (for accuracy).
DetectionMetrics detection_metrics(const std::vector<ScoredPrediction>& predictions,
                                   const std::vector<GroundTruthBox>& ground_truth,
                                   double iou_threshold = 0.5,
                                   std::optional<int> negative_candidates = std::nullopt);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // monotone in FPR
  double auc = 0.5;
};

/// Novelty ROC: lower scores are more dirt-like, so a block is predicted
/// positive when score < threshold. Sweeps all distinct scores. Throws on
/// single-class ground truth.
RocCurve roc_points(const std::vector<double>& scores, const std::vector<uint8_t>& labels);

}  // namespace scrubber

#endif
