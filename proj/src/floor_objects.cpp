#include "scrubber/floor_objects.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scrubber/rng.hpp"

namespace scrubber {

namespace {

struct BackProjected {
  std::vector<Eigen::Vector3d> points;  // camera frame
  std::vector<int> pixel;               // flat pixel index
};

BackProjected back_project(const DepthFrame& depth) {
  BackProjected bp;
  bp.points.reserve(depth.depth.size() / 2);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const float z = depth.at(u, v);
      if (z <= 0.0f) continue;
      bp.points.push_back(depth.unproject(u, v));
      bp.pixel.push_back(v * depth.width + u);
    }
  }
  return bp;
}

}  // namespace

FloorFit fit_floor(const DepthFrame& depth, const FloorFitParams& params) {
  const BackProjected bp = back_project(depth);
  const size_t n = bp.points.size();
  if (n < static_cast<size_t>(params.min_valid_pixels)) {
    throw std::runtime_error("fit_floor: not enough valid depth pixels");
  }

  // per-point thresholds from the noise model
  std::vector<double> threshold(n);
  for (size_t i = 0; i < n; ++i) {
    threshold[i] = params.noise.k * params.noise.sigma(bp.points[i].z());
  }

  Rng rng(params.ransac_seed);
  Eigen::Vector3d best_normal = Eigen::Vector3d::UnitZ();
  double best_offset = 0.0;
  size_t best_count = 0;
  for (int it = 0; it < params.ransac_iterations; ++it) {
    const size_t a = rng.uniform_index(n), b = rng.uniform_index(n), c = rng.uniform_index(n);
    if (a == b || b == c || a == c) continue;
    Eigen::Vector3d nrm = (bp.points[b] - bp.points[a]).cross(bp.points[c] - bp.points[a]);
    const double len = nrm.norm();
    if (len < 1e-12) continue;
    nrm /= len;
    const double off = nrm.dot(bp.points[a]);
    size_t count = 0;
    for (size_t i = 0; i < n; ++i) {
      if (std::abs(nrm.dot(bp.points[i]) - off) <= threshold[i]) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_normal = nrm;
      best_offset = off;
    }
  }
  if (static_cast<double>(best_count) < params.min_inlier_fraction * static_cast<double>(n)) {
    throw std::runtime_error("fit_floor: no plane with enough inliers");
  }

  // orient the normal towards the camera (origin side)
  if (best_offset > 0.0) {
    best_normal = -best_normal;
    best_offset = -best_offset;
  }

  FloorFit fit;
  fit.model.normal = best_normal;
  fit.model.offset = best_offset;
  fit.plane_inlier_fraction = static_cast<double>(best_count) / static_cast<double>(n);

  // least-squares refit of the plane on its inliers, then in-plane basis
  std::vector<size_t> inliers;
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(best_normal.dot(bp.points[i]) - best_offset) <= threshold[i]) {
      inliers.push_back(i);
    }
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (size_t i : inliers) centroid += bp.points[i];
  centroid /= static_cast<double>(inliers.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (size_t i : inliers) {
    const Eigen::Vector3d d = bp.points[i] - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  Eigen::Vector3d nrm = eig.eigenvectors().col(0);
  if (nrm.dot(best_normal) < 0) nrm = -nrm;
  fit.model.normal = nrm;
  fit.model.offset = nrm.dot(centroid);
  fit.model.plane_origin = centroid;
  fit.model.in_plane_u = eig.eigenvectors().col(2);
  fit.model.in_plane_v = nrm.cross(fit.model.in_plane_u).normalized();

  if (params.fit_curvature && inliers.size() >= 16) {
    // residual height h = n.p - d fitted as c1 u^2 + c2 v^2 + c3 uv
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (size_t i : inliers) {
      const Eigen::Vector3d rel = bp.points[i] - centroid;
      const double u = rel.dot(fit.model.in_plane_u);
      const double v = rel.dot(fit.model.in_plane_v);
      const double h = fit.model.normal.dot(bp.points[i]) - fit.model.offset;
      const Eigen::Vector3d row(u * u, v * v, u * v);
      ata += row * row.transpose();
      atb += row * h;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(ata);
    if (lu.isInvertible()) {
      Eigen::Vector3d c = lu.solve(atb);
      const double mag = std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]);
      if (mag > params.max_sag) c *= params.max_sag / mag;  // sag bound
      fit.model.curvature = c;
    }
  }

  // recompute the inlier mask against the corrected surface
  fit.inlier_mask.assign(depth.depth.size(), 0);
  size_t final_count = 0;
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(fit.model.height_above(bp.points[i])) <= threshold[i]) {
      fit.inlier_mask[bp.pixel[i]] = 1;
      ++final_count;
    }
  }
  fit.inlier_fraction = static_cast<double>(final_count) / static_cast<double>(n);
  return fit;
}

ObjectDetection detect_objects(const DepthFrame& depth, const FloorModel& floor,
                               const ObjectDetectParams& params) {
  const int w = depth.width, h = depth.height;
  ObjectDetection out;
  out.mask.assign(static_cast<size_t>(w) * h, kMaskUnknown);

  std::vector<Eigen::Vector3d> points(static_cast<size_t>(w) * h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const size_t idx = static_cast<size_t>(v) * w + u;
      const float z = depth.at(u, v);
      if (z <= 0.0f) continue;
      points[idx] = depth.unproject(u, v);
      const double height = floor.height_above(points[idx]);
      const double thresh = params.noise.k * params.noise.sigma(z);
      if (height > thresh) {
        out.mask[idx] = kMaskObstacle;
      } else if (height >= -thresh) {
        out.mask[idx] = kMaskFloor;
      }
      // below the floor stays unknown (sinks, drain gates)
    }
  }

  // 8-connected components over obstacle pixels
  std::vector<int> label(static_cast<size_t>(w) * h, -1);
  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (out.mask[start] != kMaskObstacle || label[start] >= 0) continue;
    const int comp = static_cast<int>(components.size());
    components.emplace_back();
    stack.clear();
    stack.push_back(start);
    label[start] = comp;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      components[comp].push_back(cur);
      const int cu = cur % w, cv = cur / w;
      for (int dv = -1; dv <= 1; ++dv) {
        for (int du = -1; du <= 1; ++du) {
          if (du == 0 && dv == 0) continue;
          const int nu = cu + du, nv = cv + dv;
          if (nu < 0 || nu >= w || nv < 0 || nv >= h) continue;
          const int nidx = nv * w + nu;
          if (out.mask[nidx] == kMaskObstacle && label[nidx] < 0) {
            label[nidx] = comp;
            stack.push_back(nidx);
          }
        }
      }
    }
  }

  for (const auto& comp : components) {
    if (static_cast<int>(comp.size()) < params.min_component_pixels) {
      // speckle suppression: sub-threshold components are not obstacles
      for (int idx : comp) out.mask[idx] = kMaskUnknown;
      continue;
    }
    Eigen::Vector3d lo = points[comp.front()], hi = lo;
    for (int idx : comp) {
      lo = lo.cwiseMin(points[idx]);
      hi = hi.cwiseMax(points[idx]);
    }
    out.boxes.push_back(BoundingBox3D::from_min_max(lo, hi));
    out.pixel_counts.push_back(static_cast<int>(comp.size()));
  }
  return out;
}

}  // namespace scrubber
