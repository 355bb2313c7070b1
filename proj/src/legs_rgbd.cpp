#include "scrubber/legs_rgbd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace scrubber {

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine_similarity: undefined for zero vector");
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine_similarity(const ColorHistogram& a, const ColorHistogram& b) {
  return cosine_similarity(std::vector<double>(a.begin(), a.end()),
                           std::vector<double>(b.begin(), b.end()));
}

ColorHistogram color_histogram(const std::vector<ColoredPoint>& points) {
  if (points.empty()) throw std::invalid_argument("color_histogram: empty input");
  ColorHistogram hist{};
  const double w = 1.0 / static_cast<double>(points.size());
  for (const auto& p : points) {
    const int idx = (p.r >> 6) * 16 + (p.g >> 6) * 4 + (p.b >> 6);
    hist[idx] += w;
  }
  return hist;
}

std::vector<LegCandidate> extract_leg_candidates(const ColoredCloud& cloud,
                                                 const RgbdLegParams& params,
                                                 ColoredCloud* processed_out) {
  std::vector<LegCandidate> candidates;
  if (cloud.empty()) return candidates;

  ColoredCloud processed = voxel_downsample(cloud, params.voxel_leaf);
  std::vector<Plane> removed;
  processed = remove_planes(processed, params.plane_inlier_threshold,
                            params.plane_min_inlier_fraction, params.ransac_seed, &removed);

  // ground = the most horizontal removed plane, else the z = 0 base plane
  double ground_z = 0.0;
  double best_tilt = std::numeric_limits<double>::infinity();
  for (const auto& pl : removed) {
    const double tilt = std::abs(std::abs(pl.normal.z()) - 1.0);
    if (tilt < 0.2 && tilt < best_tilt) {
      best_tilt = tilt;
      ground_z = pl.normal.z() > 0 ? pl.offset : -pl.offset;
    }
  }

  // keep the band below the camera height
  ColoredCloud band;
  band.timestamp = processed.timestamp;
  for (const auto& p : processed.points) {
    if (p.z - ground_z <= params.band_height) band.points.push_back(p);
  }

  auto clusters = euclidean_cluster(band, params.cluster_tolerance, params.min_cluster_size,
                                    params.max_cluster_size);
  for (auto& c : clusters) {
    const Eigen::Vector3d ext = c.bbox.extents;
    if (c.bbox.min().z() - ground_z > params.max_base_height) continue;
    if (ext.z() < params.upright_ratio * std::max(ext.x(), ext.y())) continue;
    std::vector<ColoredPoint> members;
    members.reserve(c.indices.size());
    for (int idx : c.indices) members.push_back(band.points[idx]);
    LegCandidate cand;
    cand.histogram = color_histogram(members);
    cand.cluster = std::move(c);
    candidates.push_back(std::move(cand));
  }
  if (processed_out) *processed_out = std::move(band);
  return candidates;
}

std::vector<Detection> detect_legs_rgbd(const ColoredCloud& cloud, const RgbdLegParams& params,
                                        const Eigen::Isometry3d& world_T_base) {
  std::vector<Detection> detections;
  const auto candidates = extract_leg_candidates(cloud, params);
  if (candidates.size() < 2) return detections;

  struct PairOption {
    size_t a, b;
    double distance;
    double similarity;
  };
  std::vector<PairOption> options;
  for (size_t a = 0; a < candidates.size(); ++a) {
    for (size_t b = a + 1; b < candidates.size(); ++b) {
      const double dist = (candidates[a].cluster.centroid - candidates[b].cluster.centroid).norm();
      const double sim = cosine_similarity(candidates[a].histogram, candidates[b].histogram);
      if (!leg_pair_admissible(sim, dist, params)) continue;
      const Eigen::Vector3d lo =
          candidates[a].cluster.bbox.min().cwiseMin(candidates[b].cluster.bbox.min());
      const Eigen::Vector3d hi =
          candidates[a].cluster.bbox.max().cwiseMax(candidates[b].cluster.bbox.max());
      const Eigen::Vector3d ext = hi - lo;
      const double volume = ext.x() * ext.y() * ext.z();
      if (volume < params.pair_volume_min || volume > params.pair_volume_max) continue;
      options.push_back({a, b, dist, sim});
    }
  }
  // closest pairs first, each candidate used at most once
  std::sort(options.begin(), options.end(), [](const PairOption& l, const PairOption& r) {
    if (l.distance != r.distance) return l.distance < r.distance;
    return std::tie(l.a, l.b) < std::tie(r.a, r.b);
  });
  std::vector<char> used(candidates.size(), 0);
  for (const auto& opt : options) {
    if (used[opt.a] || used[opt.b]) continue;
    used[opt.a] = used[opt.b] = 1;
    const Eigen::Vector3d mid =
        0.5 * (candidates[opt.a].cluster.centroid + candidates[opt.b].cluster.centroid);
    const Eigen::Vector3d world = world_T_base * mid;
    Detection det;
    det.position = {world.x(), world.y()};
    det.covariance =
        Eigen::Matrix2d::Identity() * (params.position_sigma * params.position_sigma);
    det.source = DetectionSource::rgbd_legs;
    det.confidence = opt.similarity;
    det.timestamp = cloud.timestamp;
    detections.push_back(det);
  }
  return detections;
}

}  // namespace scrubber
