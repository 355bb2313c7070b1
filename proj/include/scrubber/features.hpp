#ifndef SCRUBBER_FEATURES_HPP
#define SCRUBBER_FEATURES_HPP

#include <array>
#include <vector>

#include "scrubber/clustering.hpp"
#include "scrubber/geometry.hpp"

namespace scrubber {

/// 71-dimensional cluster descriptor for the lidar human classifier:
///   f1 point count                                   (1)   [0]
///   f2 minimum 3D distance from the sensor           (1)   [1]
///   f3 3D covariance, upper triangular               (6)   [2..7]
///   f4 normalized moment-of-inertia tensor, upper tri(6)   [8..13]
///   f5 10 vertical slices x (width, depth)           (20)  [14..33]
///   f6 intensity mean, std, 25-bin histogram         (27)  [34..60]
///   f7 per-slice centroid distance to the sensor     (10)  [61..70]
constexpr int kFeatureDim = 71;
constexpr int kSliceCount = 10;
constexpr int kIntensityBins = 25;

using FeatureVector = std::array<double, kFeatureDim>;

FeatureVector extract_features(const Cluster& cluster, const PointCloud3D& source_cloud);

/// Per-dimension (min, max) observed over a training set; maps each
/// dimension affinely onto [-1, 1] (constant dimensions go to 0).
struct ScalingRanges {
  std::vector<double> min_values;
  std::vector<double> max_values;
};

ScalingRanges fit_scaling(const std::vector<FeatureVector>& train_features);
FeatureVector apply_scaling(const FeatureVector& vec, const ScalingRanges& ranges);

std::vector<double> apply_scaling(const std::vector<double>& vec, const ScalingRanges& ranges);
ScalingRanges fit_scaling_generic(const std::vector<std::vector<double>>& train_features);

}  // namespace scrubber

#endif
