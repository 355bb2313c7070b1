#include "scrubber/legs_laser.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

using json = nlohmann::json;

namespace scrubber {

namespace {

constexpr double kRadiusSentinel = 10.0;  // collinear: circle fit degenerates

// Kasa algebraic circle fit: minimizes sum (x^2+y^2 + a x + b y + c)^2.
// Returns false when the 3x3 system is singular (collinear points).
bool kasa_circle(const std::vector<Eigen::Vector2d>& pts, Eigen::Vector2d* center,
                 double* radius) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector3d row(p.x(), p.y(), 1.0);
    m += row * row.transpose();
    rhs -= (p.squaredNorm()) * row;
  }
  Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
  if (!lu.isInvertible()) return false;
  const Eigen::Vector3d abc = lu.solve(rhs);
  center->x() = -abc[0] / 2.0;
  center->y() = -abc[1] / 2.0;
  const double r2 = center->squaredNorm() - abc[2];
  if (r2 <= 0.0 || !std::isfinite(r2)) return false;
  *radius = std::sqrt(r2);
  return true;
}

}  // namespace

std::array<double, kScanFeatureDim> segment_features(const std::vector<Eigen::Vector2d>& pts) {
  if (pts.size() < 3) throw std::invalid_argument("segment needs >= 3 points");
  std::array<double, kScanFeatureDim> f{};
  const int n = static_cast<int>(pts.size());
  f[0] = n;
  f[1] = (pts.back() - pts.front()).norm();

  // total-least-squares line through the centroid
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= n;
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d d = p - mean;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  // smallest eigenvalue = sum of squared residuals to the best line
  f[6] = std::max(eig.eigenvalues()(0), 0.0) / n;

  Eigen::Vector2d center;
  double radius = 0.0;
  if (kasa_circle(pts, &center, &radius) && radius < 1e3) {
    f[3] = radius;
    double res = 0.0;
    for (const auto& p : pts) {
      const double d = (p - center).norm() - radius;
      res += d * d;
    }
    f[2] = res / n;
  } else {
    f[3] = kRadiusSentinel;
    f[2] = f[6];  // fall back to the line residual
  }

  // mean curvature: inverse circumradius of consecutive triples
  double curv_sum = 0.0;
  int curv_n = 0;
  for (int i = 0; i + 2 < n; ++i) {
    const Eigen::Vector2d& a = pts[i];
    const Eigen::Vector2d& b = pts[i + 1];
    const Eigen::Vector2d& c = pts[i + 2];
    const double area2 = std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                                  (b.y() - a.y()) * (c.x() - a.x()));
    const double la = (b - a).norm(), lb = (c - b).norm(), lc = (a - c).norm();
    const double denom = la * lb * lc;
    curv_sum += denom > 1e-12 ? 2.0 * area2 / denom : 0.0;
    ++curv_n;
  }
  f[4] = curv_n > 0 ? curv_sum / curv_n : 0.0;
  f[5] = 0.0;  // mean speed needs temporal pairing; single-frame mode
  return f;
}

std::array<double, kScanFeatureDim> segment_features(const std::vector<Eigen::Vector2d>& points,
                                                     const std::vector<Eigen::Vector2d>& previous,
                                                     double dt) {
  auto f = segment_features(points);
  if (previous.empty() || dt <= 0.0) return f;
  double total = 0.0;
  for (const auto& p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : previous) best = std::min(best, (p - q).squaredNorm());
    total += std::sqrt(best);
  }
  f[5] = total / static_cast<double>(points.size()) / dt;
  return f;
}

std::vector<ScanSegment> segment_scan(const LaserScan2D& scan, double jump_threshold) {
  if (jump_threshold <= 0.0) throw std::invalid_argument("jump_threshold must be > 0");
  std::vector<ScanSegment> segments;
  std::vector<Eigen::Vector2d> current;
  double prev_range = 0.0;
  bool in_segment = false;

  auto flush = [&]() {
    if (current.size() >= 3) {
      ScanSegment seg;
      seg.points = current;
      seg.centroid = Eigen::Vector2d::Zero();
      for (const auto& p : current) seg.centroid += p;
      seg.centroid /= static_cast<double>(current.size());
      seg.features = segment_features(current);
      segments.push_back(std::move(seg));
    }
    current.clear();
    in_segment = false;
  };

  for (size_t i = 0; i < scan.ranges.size(); ++i) {
    if (!scan.valid(i)) {
      flush();
      continue;
    }
    if (in_segment && std::abs(scan.ranges[i] - prev_range) > jump_threshold) flush();
    current.push_back(scan.point(i));
    prev_range = scan.ranges[i];
    in_segment = true;
  }
  flush();
  return segments;
}

AdaBoostModel adaboost_train(const std::vector<AdaBoostExample>& examples, int rounds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  if (examples.empty()) throw std::invalid_argument("empty training set");
  const size_t dim = examples.front().features.size();
  bool has_pos = false, has_neg = false;
  for (const auto& e : examples) {
    if (e.features.size() != dim) throw std::invalid_argument("inconsistent feature dimensions");
    (e.label > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw std::invalid_argument("both classes required");

  const size_t n = examples.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));

  // candidate thresholds per feature: midpoints between sorted distinct values
  std::vector<std::vector<double>> thresholds(dim);
  for (size_t d = 0; d < dim; ++d) {
    std::vector<double> vals(n);
    for (size_t i = 0; i < n; ++i) vals[i] = examples[i].features[d];
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    auto& th = thresholds[d];
    th.push_back(vals.front() - 1.0);
    for (size_t i = 0; i + 1 < vals.size(); ++i) th.push_back(0.5 * (vals[i] + vals[i + 1]));
  }

  AdaBoostModel model;
  for (int t = 0; t < rounds; ++t) {
    DecisionStump best;
    double best_err = std::numeric_limits<double>::infinity();
    for (size_t d = 0; d < dim; ++d) {
      for (double th : thresholds[d]) {
        double err_pos = 0.0;  // polarity +1: predict +1 when x > th
        for (size_t i = 0; i < n; ++i) {
          const int pred = examples[i].features[d] > th ? +1 : -1;
          if (pred != examples[i].label) err_pos += w[i];
        }
        if (err_pos < best_err) {
          best_err = err_pos;
          best = {static_cast<int>(d), th, +1, 0.0};
        }
        const double err_neg = 1.0 - err_pos;
        if (err_neg < best_err) {
          best_err = err_neg;
          best = {static_cast<int>(d), th, -1, 0.0};
        }
      }
    }
    if (best_err >= 0.5) break;  // no weak learner left
    const double eps = 1e-10;
    best.weight = 0.5 * std::log((1.0 - best_err + eps) / (best_err + eps));
    model.stumps.push_back(best);
    if (best_err < eps) break;  // perfectly separated

    double norm = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const int pred =
          best.polarity * (examples[i].features[best.feature] > best.threshold ? +1 : -1);
      w[i] *= std::exp(-best.weight * pred * examples[i].label);
      norm += w[i];
    }
    for (auto& wi : w) wi /= norm;
  }
  if (model.stumps.empty()) {
    throw std::runtime_error("adaboost_train: no stump beats weighted error 0.5");
  }
  return model;
}

AdaBoostResult adaboost_classify(const AdaBoostModel& model, const std::vector<double>& features) {
  if (model.stumps.empty()) throw std::invalid_argument("empty model");
  double score = 0.0;
  for (const auto& st : model.stumps) {
    const int pred = st.polarity * (features[st.feature] > st.threshold ? +1 : -1);
    score += st.weight * pred;
  }
  AdaBoostResult r;
  r.margin = score / model.weight_sum();
  r.label = score >= 0 ? +1 : -1;
  return r;
}

void save_adaboost_model(const AdaBoostModel& model, const std::string& path) {
  json stumps = json::array();
  for (const auto& st : model.stumps) {
    stumps.push_back({{"feature", st.feature},
                      {"threshold", st.threshold},
                      {"polarity", st.polarity},
                      {"weight", st.weight}});
  }
  json j;
  j["stumps"] = std::move(stumps);
  j["feature_layout"] = "beams,width,circularity,radius,mean_curvature,mean_speed,linearity";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model: " + path);
  out << j.dump(2) << '\n';
}

AdaBoostModel load_adaboost_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model: " + path);
  json j;
  in >> j;
  AdaBoostModel m;
  for (const auto& sj : j.at("stumps")) {
    m.stumps.push_back({sj.at("feature").get<int>(), sj.at("threshold").get<double>(),
                        sj.at("polarity").get<int>(), sj.at("weight").get<double>()});
  }
  if (m.stumps.empty()) throw std::runtime_error("model has no stumps");
  return m;
}

std::vector<Detection> detect_legs_2d(const LaserScan2D& scan, const AdaBoostModel& model,
                                      const LaserLegParams& params,
                                      const Eigen::Isometry3d& world_T_laser) {
  std::vector<Detection> detections;
  const auto segments = segment_scan(scan, params.jump_threshold);
  std::vector<const ScanSegment*> positives;
  for (const auto& seg : segments) {
    const auto res =
        adaboost_classify(model, std::vector<double>(seg.features.begin(), seg.features.end()));
    if (res.label > 0) positives.push_back(&seg);
  }

  struct PairOption {
    size_t a, b;
    double distance;
  };
  std::vector<PairOption> options;
  for (size_t a = 0; a < positives.size(); ++a) {
    for (size_t b = a + 1; b < positives.size(); ++b) {
      const double d = (positives[a]->centroid - positives[b]->centroid).norm();
      if (d <= params.pairing_max) options.push_back({a, b, d});
    }
  }
  std::sort(options.begin(), options.end(), [](const PairOption& l, const PairOption& r) {
    if (l.distance != r.distance) return l.distance < r.distance;
    return std::tie(l.a, l.b) < std::tie(r.a, r.b);
  });

  auto emit = [&](const Eigen::Vector2d& pos, double confidence) {
    const Eigen::Vector3d world = world_T_laser * Eigen::Vector3d(pos.x(), pos.y(), 0.0);
    Detection det;
    det.position = {world.x(), world.y()};
    det.covariance = Eigen::Matrix2d::Identity() * (params.position_sigma * params.position_sigma);
    det.source = DetectionSource::laser_legs;
    det.confidence = confidence;
    det.timestamp = scan.timestamp;
    detections.push_back(det);
  };

  std::vector<char> used(positives.size(), 0);
  for (const auto& opt : options) {
    if (used[opt.a] || used[opt.b]) continue;
    used[opt.a] = used[opt.b] = 1;
    emit(0.5 * (positives[opt.a]->centroid + positives[opt.b]->centroid), params.pair_confidence);
  }
  for (size_t i = 0; i < positives.size(); ++i) {
    if (!used[i]) emit(positives[i]->centroid, 0.5 * params.pair_confidence);
  }
  return detections;
}

}  // namespace scrubber
