#ifndef SCRUBBER_LEGS_RGBD_HPP
#define SCRUBBER_LEGS_RGBD_HPP

#include <array>
#include <vector>

#include "scrubber/clustering.hpp"
#include "scrubber/detection.hpp"

namespace scrubber {

/// 64-bin RGB histogram (4x4x4 uniform quantization), L1-normalized.
using ColorHistogram = std::array<double, 64>;

/// A . B / (|A| |B|). Throws on zero vectors (undefined).
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);
double cosine_similarity(const ColorHistogram& a, const ColorHistogram& b);

ColorHistogram color_histogram(const std::vector<ColoredPoint>& points);

struct RgbdLegParams {
  double voxel_leaf = 0.02;
  double plane_inlier_threshold = 0.02;
  double plane_min_inlier_fraction = 0.3;
  uint64_t ransac_seed = 1;
  double cluster_tolerance = 0.1;
  int min_cluster_size = 10;
  int max_cluster_size = 30000;
  double band_height = 0.55;       // camera mounting height; only points below survive
  double max_base_height = 0.2;    // feet no more than this far off the ground
  double upright_ratio = 2.0;      // h >= ratio * max(w, d)
  double pair_volume_min = 0.1;    // union bbox of the candidate pair, m^3
  double pair_volume_max = 0.5;
  double similarity_threshold = 0.8;
  double max_pair_distance = 1.0;  // meters between candidate centroids
  double position_sigma = 0.15;
};

/// Pairing predicate of the final step, exposed so threshold boundaries are
/// testable directly: similarity strictly above, distance strictly below.
inline bool leg_pair_admissible(double similarity, double distance, const RgbdLegParams& p) {
  return similarity > p.similarity_threshold && distance < p.max_pair_distance;
}

struct LegCandidate {
  Cluster cluster;  // indices into the processed cloud
  ColorHistogram histogram;
};

/// Candidate extraction (steps 1-5): downsample, strip planes, cluster the
/// sub-band, apply the base/upright rules, histogram the survivors.
std::vector<LegCandidate> extract_leg_candidates(const ColoredCloud& cloud,
                                                 const RgbdLegParams& params,
                                                 ColoredCloud* processed = nullptr);

/// Full detector: closest admissible candidate pairs become one Detection at
/// the pair midpoint. Input cloud is in the robot base frame (z up, floor at
/// z = 0); world_T_base places detections in world coordinates.
std::vector<Detection> detect_legs_rgbd(const ColoredCloud& cloud, const RgbdLegParams& params,
                                        const Eigen::Isometry3d& world_T_base);

}  // namespace scrubber

#endif
