#include "scrubber/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scrubber {

FeatureVector extract_features(const Cluster& cluster, const PointCloud3D& source_cloud) {
  if (cluster.indices.empty()) throw std::invalid_argument("empty cluster");
  const auto& pts = source_cloud.points;
  const int n = static_cast<int>(cluster.indices.size());

  FeatureVector f{};
  f[0] = n;  // f1

  double min_dist2 = std::numeric_limits<double>::infinity();
  for (int idx : cluster.indices) {
    min_dist2 = std::min(min_dist2, pts[idx].position().squaredNorm());
  }
  f[1] = std::sqrt(min_dist2);  // f2: 3D euclidean range of the nearest point

  // f3: sample covariance about the centroid (upper triangle, row-major)
  const Eigen::Vector3d mean = cluster.centroid;
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (int idx : cluster.indices) {
    const Eigen::Vector3d d = pts[idx].position() - mean;
    scatter += d * d.transpose();
  }
  const Eigen::Matrix3d cov = scatter / std::max(n - 1, 1);
  f[2] = cov(0, 0);
  f[3] = cov(0, 1);
  f[4] = cov(0, 2);
  f[5] = cov(1, 1);
  f[6] = cov(1, 2);
  f[7] = cov(2, 2);

  // f4: moment of inertia of the centered points, normalized by count
  Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
  for (int idx : cluster.indices) {
    const Eigen::Vector3d d = pts[idx].position() - mean;
    inertia(0, 0) += d.y() * d.y() + d.z() * d.z();
    inertia(0, 1) += -d.x() * d.y();
    inertia(0, 2) += -d.x() * d.z();
    inertia(1, 1) += d.x() * d.x() + d.z() * d.z();
    inertia(1, 2) += -d.y() * d.z();
    inertia(2, 2) += d.x() * d.x() + d.y() * d.y();
  }
  inertia /= n;
  f[8] = inertia(0, 0);
  f[9] = inertia(0, 1);
  f[10] = inertia(0, 2);
  f[11] = inertia(1, 1);
  f[12] = inertia(1, 2);
  f[13] = inertia(2, 2);

  // f5/f7: vertical extent cut into 10 equal slices
  const double z_min = cluster.bbox.min().z();
  const double z_max = cluster.bbox.max().z();
  const double span = std::max(z_max - z_min, 1e-9);
  struct SliceAcc {
    double min_x = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int n = 0;
  };
  std::array<SliceAcc, kSliceCount> slices;
  for (int idx : cluster.indices) {
    const Eigen::Vector3d p = pts[idx].position();
    int s = static_cast<int>((p.z() - z_min) / span * kSliceCount);
    s = std::clamp(s, 0, kSliceCount - 1);
    auto& acc = slices[s];
    acc.min_x = std::min(acc.min_x, p.x());
    acc.max_x = std::max(acc.max_x, p.x());
    acc.min_y = std::min(acc.min_y, p.y());
    acc.max_y = std::max(acc.max_y, p.y());
    acc.sum += p;
    acc.n += 1;
  }
  for (int s = 0; s < kSliceCount; ++s) {
    const auto& acc = slices[s];
    if (acc.n > 0) {
      f[14 + 2 * s] = acc.max_x - acc.min_x;
      f[14 + 2 * s + 1] = acc.max_y - acc.min_y;
      f[61 + s] = (acc.sum / acc.n).norm();
    }
    // empty slices stay zero
  }

  // f6: intensity mean, std, normalized 25-bin histogram over [0, 255]
  double i_sum = 0.0, i_sq = 0.0;
  for (int idx : cluster.indices) {
    const double v = pts[idx].intensity;
    i_sum += v;
    i_sq += v * v;
  }
  const double i_mean = i_sum / n;
  const double i_var = std::max(i_sq / n - i_mean * i_mean, 0.0);
  f[34] = i_mean;
  f[35] = std::sqrt(i_var);
  const double weight = 1.0 / n;
  for (int idx : cluster.indices) {
    int bin = static_cast<int>(pts[idx].intensity * kIntensityBins / 256.0);
    bin = std::clamp(bin, 0, kIntensityBins - 1);
    f[36 + bin] += weight;
  }

  return f;
}

ScalingRanges fit_scaling_generic(const std::vector<std::vector<double>>& train_features) {
  if (train_features.empty()) throw std::invalid_argument("empty training set");
  const size_t dim = train_features.front().size();
  ScalingRanges r;
  r.min_values.assign(dim, std::numeric_limits<double>::infinity());
  r.max_values.assign(dim, -std::numeric_limits<double>::infinity());
  for (const auto& v : train_features) {
    if (v.size() != dim) throw std::invalid_argument("inconsistent feature dimensions");
    for (size_t d = 0; d < dim; ++d) {
      r.min_values[d] = std::min(r.min_values[d], v[d]);
      r.max_values[d] = std::max(r.max_values[d], v[d]);
    }
  }
  return r;
}

std::vector<double> apply_scaling(const std::vector<double>& vec, const ScalingRanges& ranges) {
  if (vec.size() != ranges.min_values.size()) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  std::vector<double> out(vec.size());
  for (size_t d = 0; d < vec.size(); ++d) {
    const double lo = ranges.min_values[d], hi = ranges.max_values[d];
    out[d] = (hi > lo) ? -1.0 + 2.0 * (vec[d] - lo) / (hi - lo) : 0.0;
  }
  return out;
}

ScalingRanges fit_scaling(const std::vector<FeatureVector>& train_features) {
  std::vector<std::vector<double>> rows;
  rows.reserve(train_features.size());
  for (const auto& f : train_features) rows.emplace_back(f.begin(), f.end());
  return fit_scaling_generic(rows);
}

FeatureVector apply_scaling(const FeatureVector& vec, const ScalingRanges& ranges) {
  const auto scaled = apply_scaling(std::vector<double>(vec.begin(), vec.end()), ranges);
  FeatureVector out;
  std::copy(scaled.begin(), scaled.end(), out.begin());
  return out;
}

}  // namespace scrubber
