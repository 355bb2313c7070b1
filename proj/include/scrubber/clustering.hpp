#ifndef SCRUBBER_CLUSTERING_HPP
#define SCRUBBER_CLUSTERING_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "scrubber/geometry.hpp"

namespace scrubber {

/// Point-index group with tight axis-aligned box and arithmetic-mean centroid.
struct Cluster {
  std::vector<int> indices;  // into the source cloud
  BoundingBox3D bbox;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();

  double planar_range() const { return std::hypot(centroid.x(), centroid.y()); }
};

/// One nested circular region: euclidean tolerance to use out to outer_radius.
struct RingStep {
  double outer_radius;  // meters of planar range; last entry may be +inf
  double tolerance;     // meters
};

struct ClusteringParams {
  double voxel_leaf = 0.06;            // m
  double plane_inlier_threshold = 0.02;  // m
  double plane_min_inlier_fraction = 0.2;
  int ransac_iterations = 200;
  double ransac_confidence = 0.99;
  uint64_t ransac_seed = 1;
  double euclidean_tolerance = 0.45;  // m
  int min_cluster_size = 5;
  int max_cluster_size = 30000;
  // Linear growth with range, compensating beam divergence; configurable
  // because the exact on-robot schedule is unpublished.
  std::vector<RingStep> ring_schedule = {
      {5.0, 0.3}, {10.0, 0.45}, {15.0, 0.6}, {20.0, 0.75},
      {std::numeric_limits<double>::infinity(), 0.9}};
};

struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();  // unit length
  double offset = 0.0;                                // normal . p = offset

  double distance(const Eigen::Vector3d& p) const { return std::abs(normal.dot(p) - offset); }
};

/// At most one point per occupied voxel; the output point is the centroid of
/// the voxel members with their mean intensity. Output ordered by voxel index.
PointCloud3D voxel_downsample(const PointCloud3D& cloud, double leaf);
ColoredCloud voxel_downsample(const ColoredCloud& cloud, double leaf);

/// Iteratively fits planes with seeded RANSAC and strips the inliers of every
/// plane holding at least min_inlier_fraction of the remaining points.
/// Removed planes are appended to *removed when given (first = largest).
PointCloud3D remove_planes(const PointCloud3D& cloud, double inlier_threshold,
                           double min_inlier_fraction, uint64_t seed = 1,
                           std::vector<Plane>* removed = nullptr);
ColoredCloud remove_planes(const ColoredCloud& cloud, double inlier_threshold,
                           double min_inlier_fraction, uint64_t seed = 1,
                           std::vector<Plane>* removed = nullptr);

/// Connected components of the graph linking points closer than tolerance;
/// components outside [min_size, max_size] are dropped. Sorted by planar range.
std::vector<Cluster> euclidean_cluster(const PointCloud3D& cloud, double tolerance,
                                       int min_size, int max_size);
std::vector<Cluster> euclidean_cluster(const ColoredCloud& cloud, double tolerance,
                                       int min_size, int max_size);

/// Range-adaptive clustering: points are bucketed into nested rings by planar
/// range, clustered per ring with that ring's tolerance, and clusters that
/// straddle a ring boundary are merged.
std::vector<Cluster> adaptive_cluster(const PointCloud3D& cloud,
                                      const std::vector<RingStep>& ring_schedule,
                                      int min_size, int max_size);

/// Keeps clusters whose box extents satisfy the human-candidate volume rule:
/// 0.2 <= w <= 1.0, 0.2 <= d <= 1.0, 0.5 <= h <= 2.0 (inclusive).
std::vector<Cluster> volumetric_filter(const std::vector<Cluster>& clusters);

bool human_candidate_extents(const Eigen::Vector3d& extents);

}  // namespace scrubber

#endif
