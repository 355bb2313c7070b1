#include "scrubber/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "scrubber/png_io.hpp"

namespace scrubber {

HeatmapGrid::HeatmapGrid(double origin_x, double origin_y, double cell_size, int width,
                         int height)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      cell_size_(cell_size),
      width_(width),
      height_(height),
      counts_(static_cast<size_t>(width) * height, 0.0),
      observed_(static_cast<size_t>(width) * height, 0) {
  if (cell_size <= 0 || width <= 0 || height <= 0) {
    throw std::invalid_argument("heatmap grid needs positive cell size and dimensions");
  }
}

bool HeatmapGrid::contains(double x, double y) const {
  const auto [cx, cy] = cell_of(x, y);
  return cx >= 0 && cx < width_ && cy >= 0 && cy < height_;
}

std::pair<int, int> HeatmapGrid::cell_of(double x, double y) const {
  return {static_cast<int>(std::floor((x - origin_x_) / cell_size_)),
          static_cast<int>(std::floor((y - origin_y_) / cell_size_))};
}

void HeatmapGrid::add(double x, double y, double amount) {
  const auto [cx, cy] = cell_of(x, y);
  if (cx < 0 || cx >= width_ || cy < 0 || cy >= height_) return;
  counts_[index(cx, cy)] += amount;
  observed_[index(cx, cy)] = 1;
}

void HeatmapGrid::set(double x, double y, double value) {
  const auto [cx, cy] = cell_of(x, y);
  if (cx < 0 || cx >= width_ || cy < 0 || cy >= height_) return;
  counts_[index(cx, cy)] = value;
  observed_[index(cx, cy)] = 1;
}

double HeatmapGrid::max_count() const {
  double m = 0.0;
  for (double c : counts_) m = std::max(m, c);
  return m;
}

double HeatmapGrid::normalized(int cx, int cy) const {
  const double m = max_count();
  return m > 0.0 ? counts_[index(cx, cy)] / m : 0.0;
}

std::string HeatmapGrid::to_csv(bool mark_unobserved) const {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "# origin %.6f %.6f cell %.6f\n", origin_x_, origin_y_,
                cell_size_);
  out += buf;
  for (int cy = 0; cy < height_; ++cy) {
    for (int cx = 0; cx < width_; ++cx) {
      if (cx) out += ',';
      if (mark_unobserved && !observed_[index(cx, cy)]) {
        out += "-1";
      } else {
        std::snprintf(buf, sizeof(buf), "%g", counts_[index(cx, cy)]);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

void HeatmapGrid::write_png(const std::string& path, bool mark_unobserved) const {
  std::vector<uint8_t> rgb(static_cast<size_t>(width_) * height_ * 3);
  const double m = max_count();
  for (int cy = 0; cy < height_; ++cy) {
    for (int cx = 0; cx < width_; ++cx) {
      uint8_t* px = &rgb[3 * ((static_cast<size_t>(height_ - 1 - cy)) * width_ + cx)];
      if (mark_unobserved && !observed_[index(cx, cy)]) {
        px[0] = px[1] = px[2] = 90;
        continue;
      }
      const double v = m > 0 ? counts_[index(cx, cy)] / m : 0.0;
      // dark blue -> yellow ramp
      px[0] = static_cast<uint8_t>(std::lround(255.0 * std::min(1.0, 2.0 * v)));
      px[1] = static_cast<uint8_t>(std::lround(255.0 * std::min(1.0, 1.6 * v)));
      px[2] = static_cast<uint8_t>(std::lround(80.0 * (1.0 - v)));
    }
  }
  png::write_rgb8(path, width_, height_, rgb);
}

namespace {

HeatmapGrid make_grid(const GridSpec& spec, double min_x, double min_y, double max_x,
                      double max_y) {
  const double cell = spec.cell_size;
  double ox = spec.origin_x.value_or(std::floor(min_x / cell - 1.0) * cell);
  double oy = spec.origin_y.value_or(std::floor(min_y / cell - 1.0) * cell);
  int w = spec.width.value_or(static_cast<int>(std::ceil((max_x - ox) / cell)) + 2);
  int h = spec.height.value_or(static_cast<int>(std::ceil((max_y - oy) / cell)) + 2);
  return HeatmapGrid(ox, oy, cell, std::max(w, 1), std::max(h, 1));
}

}  // namespace

HeatmapGrid trajectory_heatmap(const std::vector<std::vector<Eigen::Vector2d>>& trajectories,
                               const GridSpec& spec, bool dwell_time_mode) {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool any = false;
  for (const auto& traj : trajectories) {
    for (const auto& p : traj) {
      if (!any) {
        min_x = max_x = p.x();
        min_y = max_y = p.y();
        any = true;
      }
      min_x = std::min(min_x, p.x());
      max_x = std::max(max_x, p.x());
      min_y = std::min(min_y, p.y());
      max_y = std::max(max_y, p.y());
    }
  }
  HeatmapGrid grid = make_grid(spec, min_x, min_y, max_x, max_y);
  for (const auto& traj : trajectories) {
    if (dwell_time_mode) {
      for (const auto& p : traj) grid.add(p.x(), p.y());
    } else {
      std::set<std::pair<int, int>> visited;
      for (const auto& p : traj) {
        const auto cell = grid.cell_of(p.x(), p.y());
        if (visited.insert(cell).second) grid.add(p.x(), p.y());
      }
    }
  }
  return grid;
}

HeatmapGrid dirt_heatmap(const std::vector<std::vector<DirtObservation>>& frames,
                         const GridSpec& spec) {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  bool any = false;
  for (const auto& frame : frames) {
    for (const auto& o : frame) {
      if (!any) {
        min_x = max_x = o.x;
        min_y = max_y = o.y;
        any = true;
      }
      min_x = std::min(min_x, o.x);
      max_x = std::max(max_x, o.x);
      min_y = std::min(min_y, o.y);
      max_y = std::max(max_y, o.y);
    }
  }
  HeatmapGrid grid = make_grid(spec, min_x, min_y, max_x, max_y);
  for (const auto& frame : frames) {
    for (const auto& o : frame) {
      if (!grid.contains(o.x, o.y)) continue;
      const auto [cx, cy] = grid.cell_of(o.x, o.y);
      if (grid.observed(cx, cy)) continue;  // first observation wins
      grid.set(o.x, o.y, o.dirt ? 1.0 : 0.0);
    }
  }
  return grid;
}

double iou3d(const BoundingBox3D& a, const BoundingBox3D& b) {
  const Eigen::Vector3d lo = a.min().cwiseMax(b.min());
  const Eigen::Vector3d hi = a.max().cwiseMin(b.max());
  const Eigen::Vector3d overlap = (hi - lo).cwiseMax(0.0);
  const double inter = overlap.prod();
  const double uni = a.volume() + b.volume() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

DetectionMetrics detection_metrics(const std::vector<ScoredPrediction>& predictions,
                                   const std::vector<GroundTruthBox>& ground_truth,
                                   double iou_threshold,
                                   std::optional<int> negative_candidates) {
  if (iou_threshold <= 0.0 || iou_threshold >= 1.0) {
    throw std::invalid_argument("iou threshold must be inside (0, 1)");
  }

  // group ground truth by frame
  std::map<int, std::vector<size_t>> gt_by_frame;
  for (size_t i = 0; i < ground_truth.size(); ++i) {
    gt_by_frame[ground_truth[i].frame].push_back(i);
  }

  // greedy matching by descending score, each GT matched at most once
  std::vector<size_t> order(predictions.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (predictions[a].score != predictions[b].score) {
      return predictions[a].score > predictions[b].score;
    }
    return a < b;
  });

  std::vector<char> gt_used(ground_truth.size(), 0);
  std::vector<char> is_tp(predictions.size(), 0);
  for (size_t oi = 0; oi < order.size(); ++oi) {
    const auto& pred = predictions[order[oi]];
    const auto it = gt_by_frame.find(pred.frame);
    if (it == gt_by_frame.end()) continue;
    double best_iou = 0.0;
    ptrdiff_t best_gt = -1;
    for (size_t gi : it->second) {
      if (gt_used[gi]) continue;
      const double v = iou3d(pred.box, ground_truth[gi].box);
      if (v > best_iou) {
        best_iou = v;
        best_gt = static_cast<ptrdiff_t>(gi);
      }
    }
    if (best_gt >= 0 && best_iou >= iou_threshold) {
      gt_used[best_gt] = 1;
      is_tp[order[oi]] = 1;
    }
  }

  DetectionMetrics m;
  for (char v : is_tp) (v ? m.true_positives : m.false_positives) += 1;
  m.false_negatives = static_cast<int>(ground_truth.size()) - m.true_positives;

  const int denom_p = m.true_positives + m.false_positives;
  if (denom_p > 0) {
    m.precision = static_cast<double>(m.true_positives) / denom_p;
  } else {
    m.precision = 0.0;
    m.precision_defined = false;  // no predictions: undefined, reported as 0
  }
  const int denom_r = m.true_positives + m.false_negatives;
  m.recall = denom_r > 0 ? static_cast<double>(m.true_positives) / denom_r : 0.0;
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;

  // AP: all-point interpolation over the pooled PR curve
  if (!ground_truth.empty() && !predictions.empty()) {
    std::vector<double> prec, rec;
    int tp = 0, fp = 0;
    for (size_t oi = 0; oi < order.size(); ++oi) {
      (is_tp[order[oi]] ? tp : fp) += 1;
      prec.push_back(static_cast<double>(tp) / (tp + fp));
      rec.push_back(static_cast<double>(tp) / ground_truth.size());
    }
    // precision envelope from the right
    for (ptrdiff_t i = static_cast<ptrdiff_t>(prec.size()) - 2; i >= 0; --i) {
      prec[i] = std::max(prec[i], prec[i + 1]);
    }
    double ap = 0.0, prev_rec = 0.0;
    for (size_t i = 0; i < prec.size(); ++i) {
      ap += (rec[i] - prev_rec) * prec[i];
      prev_rec = rec[i];
    }
    m.average_precision = ap;
  }

  if (negative_candidates) {
    m.true_negatives = *negative_candidates;
    const double total = m.true_positives + m.false_positives + m.false_negatives +
                         static_cast<double>(m.true_negatives);
    if (total > 0) m.accuracy = (m.true_positives + m.true_negatives) / total;
  }
  return m;
}

RocCurve roc_points(const std::vector<double>& scores, const std::vector<uint8_t>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("roc_points: size mismatch or empty input");
  }
  int n_pos = 0, n_neg = 0;
  for (uint8_t l : labels) (l ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_points: single-class ground truth");
  }

  std::vector<double> distinct(scores);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, -std::numeric_limits<double>::infinity()});
  if (distinct.size() > 1) {
    // predicted dirt (positive) iff score < t; sweep t upward
    for (size_t k = 1; k < distinct.size(); ++k) {
      const double t = distinct[k];
      int tp = 0, fp = 0;
      for (size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] < t) (labels[i] ? tp : fp) += 1;
      }
      curve.points.push_back({static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos, t});
    }
  }
  curve.points.push_back({1.0, 1.0, std::numeric_limits<double>::infinity()});

  double auc = 0.0;
  for (size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  curve.auc = auc;
  return curve;
}

}  // namespace scrubber
