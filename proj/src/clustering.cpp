#include "scrubber/clustering.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "scrubber/rng.hpp"

namespace scrubber {

namespace {

struct VoxelKey {
  int64_t x, y, z;
  bool operator<(const VoxelKey& o) const {
    if (x != o.x) return x < o.x;
    if (y != o.y) return y < o.y;
    return z < o.z;
  }
};

VoxelKey voxel_of(const Eigen::Vector3d& p, double leaf) {
  return {static_cast<int64_t>(std::floor(p.x() / leaf)),
          static_cast<int64_t>(std::floor(p.y() / leaf)),
          static_cast<int64_t>(std::floor(p.z() / leaf))};
}

// Spatial hash grid at cell size = tolerance; neighbor search only has to
// visit the 27 surrounding cells.
struct HashGrid {
  double cell;
  std::unordered_map<uint64_t, std::vector<int>> cells;

  static uint64_t pack(int64_t x, int64_t y, int64_t z) {
    auto u = [](int64_t v) { return static_cast<uint64_t>(v + (1 << 20)) & 0x1FFFFF; };
    return (u(x) << 42) | (u(y) << 21) | u(z);
  }

  explicit HashGrid(double cell_size) : cell(cell_size) {}

  void insert(int idx, const Eigen::Vector3d& p) {
    cells[key(p)].push_back(idx);
  }

  uint64_t key(const Eigen::Vector3d& p) const {
    return pack(static_cast<int64_t>(std::floor(p.x() / cell)),
                static_cast<int64_t>(std::floor(p.y() / cell)),
                static_cast<int64_t>(std::floor(p.z() / cell)));
  }

  template <typename Visitor>
  void visit_neighbors(const Eigen::Vector3d& p, Visitor&& visit) const {
    const int64_t cx = static_cast<int64_t>(std::floor(p.x() / cell));
    const int64_t cy = static_cast<int64_t>(std::floor(p.y() / cell));
    const int64_t cz = static_cast<int64_t>(std::floor(p.z() / cell));
    for (int64_t dx = -1; dx <= 1; ++dx)
      for (int64_t dy = -1; dy <= 1; ++dy)
        for (int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells.find(pack(cx + dx, cy + dy, cz + dz));
          if (it == cells.end()) continue;
          for (int idx : it->second) visit(idx);
        }
  }
};

template <typename PointT>
std::vector<std::vector<int>> connected_components(const std::vector<PointT>& pts,
                                                   const std::vector<int>& subset,
                                                   double tolerance) {
  HashGrid grid(tolerance);
  for (int idx : subset) grid.insert(idx, pts[idx].position());

  std::unordered_map<int, char> seen;
  seen.reserve(subset.size());
  const double tol2 = tolerance * tolerance;

  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int seed : subset) {
    if (seen.count(seed)) continue;
    std::vector<int> comp;
    stack.clear();
    stack.push_back(seed);
    seen[seed] = 1;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      comp.push_back(cur);
      const Eigen::Vector3d p = pts[cur].position();
      grid.visit_neighbors(p, [&](int other) {
        if (seen.count(other)) return;
        if ((pts[other].position() - p).squaredNorm() <= tol2) {
          seen[other] = 1;
          stack.push_back(other);
        }
      });
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

template <typename PointT>
Cluster make_cluster(const std::vector<PointT>& pts, std::vector<int> indices) {
  Cluster c;
  c.indices = std::move(indices);
  Eigen::Vector3d lo = pts[c.indices.front()].position();
  Eigen::Vector3d hi = lo;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (int idx : c.indices) {
    const Eigen::Vector3d p = pts[idx].position();
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
    sum += p;
  }
  c.bbox = BoundingBox3D::from_min_max(lo, hi);
  c.centroid = sum / static_cast<double>(c.indices.size());
  return c;
}

void sort_by_range(std::vector<Cluster>& clusters) {
  std::stable_sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    return a.planar_range() < b.planar_range();
  });
}

template <typename PointT>
std::vector<Cluster> cluster_impl(const std::vector<PointT>& pts, double tolerance,
                                  int min_size, int max_size) {
  if (tolerance <= 0.0) throw std::invalid_argument("clustering tolerance must be > 0");
  std::vector<int> all(pts.size());
  std::iota(all.begin(), all.end(), 0);
  std::vector<Cluster> out;
  for (auto& comp : connected_components(pts, all, tolerance)) {
    const int n = static_cast<int>(comp.size());
    if (n < min_size || n > max_size) continue;
    out.push_back(make_cluster(pts, std::move(comp)));
  }
  sort_by_range(out);
  return out;
}

// One RANSAC round over the given subset: best plane by inlier count.
template <typename PointT>
bool ransac_plane(const std::vector<PointT>& pts, const std::vector<int>& subset,
                  double threshold, int max_iterations, double confidence, Rng& rng,
                  Plane* best_plane, std::vector<int>* best_inliers) {
  if (subset.size() < 3) return false;
  size_t best_count = 0;
  double needed_iterations = max_iterations;
  for (int it = 0; it < max_iterations && it < needed_iterations; ++it) {
    const int a = subset[rng.uniform_index(subset.size())];
    const int b = subset[rng.uniform_index(subset.size())];
    const int c = subset[rng.uniform_index(subset.size())];
    if (a == b || b == c || a == c) continue;
    const Eigen::Vector3d pa = pts[a].position();
    Eigen::Vector3d n = (pts[b].position() - pa).cross(pts[c].position() - pa);
    const double len = n.norm();
    if (len < 1e-12) continue;
    n /= len;
    const double d = n.dot(pa);
    size_t count = 0;
    for (int idx : subset) {
      if (std::abs(n.dot(pts[idx].position()) - d) <= threshold) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_plane->normal = n;
      best_plane->offset = d;
      // adaptive iteration bound from the current inlier ratio
      const double w = static_cast<double>(count) / static_cast<double>(subset.size());
      const double p3 = w * w * w;
      if (p3 > 1e-9 && p3 < 1.0) {
        needed_iterations = std::log(1.0 - confidence) / std::log(1.0 - p3);
      }
    }
  }
  if (best_count < 3) return false;
  best_inliers->clear();
  for (int idx : subset) {
    if (best_plane->distance(pts[idx].position()) <= threshold) best_inliers->push_back(idx);
  }
  return true;
}

template <typename CloudT>
CloudT remove_planes_impl(const CloudT& cloud, double inlier_threshold,
                          double min_inlier_fraction, uint64_t seed,
                          std::vector<Plane>* removed) {
  Rng rng(seed);
  std::vector<int> remaining(cloud.points.size());
  std::iota(remaining.begin(), remaining.end(), 0);

  // stop on small remnants: with few points left, best-of-200 RANSAC will
  // always find a slab holding min_inlier_fraction by chance
  const size_t remnant_floor = cloud.points.size() / 5;

  while (remaining.size() >= 3 && remaining.size() > remnant_floor) {
    Plane plane;
    std::vector<int> inliers;
    if (!ransac_plane(cloud.points, remaining, inlier_threshold, 200, 0.99, rng, &plane,
                      &inliers)) {
      break;
    }
    if (static_cast<double>(inliers.size()) <
        min_inlier_fraction * static_cast<double>(remaining.size())) {
      break;
    }
    if (removed) removed->push_back(plane);
    std::vector<int> next;
    next.reserve(remaining.size() - inliers.size());
    size_t j = 0;
    for (int idx : remaining) {
      if (j < inliers.size() && inliers[j] == idx) {
        ++j;
      } else {
        next.push_back(idx);
      }
    }
    remaining = std::move(next);
  }

  CloudT out;
  out.timestamp = cloud.timestamp;
  out.points.reserve(remaining.size());
  for (int idx : remaining) out.points.push_back(cloud.points[idx]);
  return out;
}

}  // namespace

PointCloud3D voxel_downsample(const PointCloud3D& cloud, double leaf) {
  if (leaf <= 0.0) throw std::invalid_argument("voxel leaf must be > 0");
  struct Acc {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double intensity = 0.0;
    int n = 0;
  };
  std::map<VoxelKey, Acc> voxels;
  for (const auto& p : cloud.points) {
    Acc& a = voxels[voxel_of(p.position(), leaf)];
    a.sum += p.position();
    a.intensity += p.intensity;
    a.n += 1;
  }
  PointCloud3D out;
  out.timestamp = cloud.timestamp;
  out.frame_id = cloud.frame_id;
  out.points.reserve(voxels.size());
  for (const auto& [key, a] : voxels) {
    const Eigen::Vector3d c = a.sum / a.n;
    out.points.push_back({static_cast<float>(c.x()), static_cast<float>(c.y()),
                          static_cast<float>(c.z()), static_cast<float>(a.intensity / a.n)});
  }
  return out;
}

ColoredCloud voxel_downsample(const ColoredCloud& cloud, double leaf) {
  if (leaf <= 0.0) throw std::invalid_argument("voxel leaf must be > 0");
  struct Acc {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    double r = 0, g = 0, b = 0;
    int n = 0;
  };
  std::map<VoxelKey, Acc> voxels;
  for (const auto& p : cloud.points) {
    Acc& a = voxels[voxel_of(p.position(), leaf)];
    a.sum += p.position();
    a.r += p.r;
    a.g += p.g;
    a.b += p.b;
    a.n += 1;
  }
  ColoredCloud out;
  out.timestamp = cloud.timestamp;
  out.points.reserve(voxels.size());
  for (const auto& [key, a] : voxels) {
    const Eigen::Vector3d c = a.sum / a.n;
    ColoredPoint p;
    p.x = static_cast<float>(c.x());
    p.y = static_cast<float>(c.y());
    p.z = static_cast<float>(c.z());
    p.r = static_cast<uint8_t>(std::lround(a.r / a.n));
    p.g = static_cast<uint8_t>(std::lround(a.g / a.n));
    p.b = static_cast<uint8_t>(std::lround(a.b / a.n));
    out.points.push_back(p);
  }
  return out;
}

PointCloud3D remove_planes(const PointCloud3D& cloud, double inlier_threshold,
                           double min_inlier_fraction, uint64_t seed,
                           std::vector<Plane>* removed) {
  return remove_planes_impl(cloud, inlier_threshold, min_inlier_fraction, seed, removed);
}

ColoredCloud remove_planes(const ColoredCloud& cloud, double inlier_threshold,
                           double min_inlier_fraction, uint64_t seed,
                           std::vector<Plane>* removed) {
  return remove_planes_impl(cloud, inlier_threshold, min_inlier_fraction, seed, removed);
}

std::vector<Cluster> euclidean_cluster(const PointCloud3D& cloud, double tolerance,
                                       int min_size, int max_size) {
  return cluster_impl(cloud.points, tolerance, min_size, max_size);
}

std::vector<Cluster> euclidean_cluster(const ColoredCloud& cloud, double tolerance,
                                       int min_size, int max_size) {
  return cluster_impl(cloud.points, tolerance, min_size, max_size);
}

std::vector<Cluster> adaptive_cluster(const PointCloud3D& cloud,
                                      const std::vector<RingStep>& ring_schedule,
                                      int min_size, int max_size) {
  if (ring_schedule.empty()) throw std::invalid_argument("empty ring schedule");
  for (size_t i = 0; i + 1 < ring_schedule.size(); ++i) {
    if (!(ring_schedule[i].outer_radius < ring_schedule[i + 1].outer_radius)) {
      throw std::invalid_argument("ring schedule radii must be strictly increasing");
    }
  }

  const auto& pts = cloud.points;
  const size_t n_rings = ring_schedule.size();
  std::vector<std::vector<int>> ring_members(n_rings);
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const double r = std::hypot(pts[i].x, pts[i].y);
    size_t ring = n_rings - 1;
    for (size_t k = 0; k < n_rings; ++k) {
      if (r <= ring_schedule[k].outer_radius) {
        ring = k;
        break;
      }
    }
    ring_members[ring].push_back(i);
  }

  // cluster each ring with its own tolerance; size limits applied after merging
  struct RawCluster {
    std::vector<int> indices;
    size_t ring;
  };
  std::vector<RawCluster> raw;
  for (size_t k = 0; k < n_rings; ++k) {
    if (ring_members[k].empty()) continue;
    for (auto& comp : connected_components(pts, ring_members[k], ring_schedule[k].tolerance)) {
      raw.push_back({std::move(comp), k});
    }
  }

  // merge clusters in adjacent rings whose members come within the larger of
  // the two tolerances of each other (the straddling case)
  std::vector<int> parent(raw.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (size_t a = 0; a < raw.size(); ++a) {
    for (size_t b = a + 1; b < raw.size(); ++b) {
      const size_t ra = raw[a].ring, rb = raw[b].ring;
      if (ra == rb || (ra > rb ? ra - rb : rb - ra) != 1) continue;
      const double tol = std::max(ring_schedule[ra].tolerance, ring_schedule[rb].tolerance);
      const double tol2 = tol * tol;
      bool close = false;
      for (int ia : raw[a].indices) {
        const Eigen::Vector3d pa = pts[ia].position();
        for (int ib : raw[b].indices) {
          if ((pts[ib].position() - pa).squaredNorm() <= tol2) {
            close = true;
            break;
          }
        }
        if (close) break;
      }
      if (close) parent[find(static_cast<int>(a))] = find(static_cast<int>(b));
    }
  }

  std::unordered_map<int, std::vector<int>> merged;
  for (size_t i = 0; i < raw.size(); ++i) {
    auto& dst = merged[find(static_cast<int>(i))];
    dst.insert(dst.end(), raw[i].indices.begin(), raw[i].indices.end());
  }

  std::vector<Cluster> out;
  for (auto& [root, indices] : merged) {
    const int n = static_cast<int>(indices.size());
    if (n < min_size || n > max_size) continue;
    std::sort(indices.begin(), indices.end());
    out.push_back(make_cluster(pts, std::move(indices)));
  }
  sort_by_range(out);
  return out;
}

bool human_candidate_extents(const Eigen::Vector3d& e) {
  return 0.2 <= e.x() && e.x() <= 1.0 && 0.2 <= e.y() && e.y() <= 1.0 && 0.5 <= e.z() &&
         e.z() <= 2.0;
}

std::vector<Cluster> volumetric_filter(const std::vector<Cluster>& clusters) {
  std::vector<Cluster> out;
  for (const auto& c : clusters) {
    if (human_candidate_extents(c.bbox.extents)) out.push_back(c);
  }
  return out;
}

}  // namespace scrubber
