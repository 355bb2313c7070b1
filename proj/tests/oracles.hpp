// Independent reference implementations used to freeze expected values.
// Everything here is deliberately naive (brute force, quadrature, exhaustive
// enumeration) and shares no code with the library path it checks.
#ifndef SCRUBBER_TEST_ORACLES_HPP
#define SCRUBBER_TEST_ORACLES_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

// --- connected components by O(n^2) union-find ------------------------------

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

/// Partition of all points into tolerance-connected components, each sorted,
/// only components with size inside [min_size, max_size], sorted by first index.
inline std::vector<std::vector<int>> brute_force_clusters(
    const std::vector<Eigen::Vector3d>& pts, double tolerance, int min_size, int max_size) {
  const int n = static_cast<int>(pts.size());
  UnionFind uf(n);
  const double tol2 = tolerance * tolerance;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((pts[i] - pts[j]).squaredNorm() <= tol2) uf.unite(i, j);
    }
  }
  std::map<int, std::vector<int>> comps;
  for (int i = 0; i < n; ++i) comps[uf.find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : comps) {
    const int sz = static_cast<int>(members.size());
    if (sz < min_size || sz > max_size) continue;
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- textbook Kalman filter ---------------------------------------------------

struct KalmanState {
  Eigen::Vector4d mean;
  Eigen::Matrix4d cov;
};

inline KalmanState kf_predict(const KalmanState& s, double dt, double q) {
  Eigen::Matrix4d f = Eigen::Matrix4d::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  Eigen::Matrix4d qm = Eigen::Matrix4d::Zero();
  qm(0, 0) = qm(1, 1) = q * dt * dt * dt / 3.0;
  qm(0, 2) = qm(2, 0) = qm(1, 3) = qm(3, 1) = q * dt * dt / 2.0;
  qm(2, 2) = qm(3, 3) = q * dt;
  return {f * s.mean, f * s.cov * f.transpose() + qm};
}

inline KalmanState kf_update(const KalmanState& s, const Eigen::Vector2d& z,
                             const Eigen::Matrix2d& r) {
  Eigen::Matrix<double, 2, 4> h = Eigen::Matrix<double, 2, 4>::Zero();
  h(0, 0) = h(1, 1) = 1.0;
  const Eigen::Matrix2d innovation_cov = h * s.cov * h.transpose() + r;
  const Eigen::Matrix<double, 4, 2> gain =
      s.cov * h.transpose() * innovation_cov.inverse();
  KalmanState out;
  out.mean = s.mean + gain * (z - h * s.mean);
  out.cov = (Eigen::Matrix4d::Identity() - gain * h) * s.cov;
  return out;
}

// --- chi-square (2 dof) CDF by Simpson quadrature -----------------------------

inline double chi2_2dof_cdf_quadrature(double x, int steps = 200000) {
  // pdf(t) = exp(-t/2) / 2
  auto pdf = [](double t) { return 0.5 * std::exp(-0.5 * t); };
  const double h = x / steps;
  double acc = pdf(0.0) + pdf(x);
  for (int i = 1; i < steps; ++i) acc += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  return acc * h / 3.0;
}

// --- box IoU by 1 mm voxel counting --------------------------------------------

// Count of 1 mm voxel centers inside [lo, hi) per axis; the 3D count is the
// product (axis-aligned boxes factorize). Verified against the literal
// triple loop in the tests for small boxes.
inline long long voxel_count_1d(double lo, double hi, double grid_lo, double grid_hi) {
  long long count = 0;
  const long long cells = static_cast<long long>(std::llround((grid_hi - grid_lo) * 1000.0));
  for (long long i = 0; i < cells; ++i) {
    const double center = grid_lo + (static_cast<double>(i) + 0.5) * 0.001;
    if (center >= lo && center < hi) ++count;
  }
  return count;
}

struct Box {
  Eigen::Vector3d lo, hi;
};

inline double voxel_iou(const Box& a, const Box& b) {
  Eigen::Vector3d grid_lo = a.lo.cwiseMin(b.lo);
  Eigen::Vector3d grid_hi = a.hi.cwiseMax(b.hi);
  long long va = 1, vb = 1, vi = 1;
  for (int axis = 0; axis < 3; ++axis) {
    va *= voxel_count_1d(a.lo[axis], a.hi[axis], grid_lo[axis], grid_hi[axis]);
    vb *= voxel_count_1d(b.lo[axis], b.hi[axis], grid_lo[axis], grid_hi[axis]);
    vi *= voxel_count_1d(std::max(a.lo[axis], b.lo[axis]), std::min(a.hi[axis], b.hi[axis]),
                         grid_lo[axis], grid_hi[axis]);
  }
  const long long vu = va + vb - vi;
  return vu > 0 ? static_cast<double>(vi) / static_cast<double>(vu) : 0.0;
}

// --- JPDA marginals by exhaustive mapping enumeration --------------------------

// Enumerates ALL functions tracks -> {miss} U detections (including invalid
// ones, filtered for detection reuse), unlike the implementation's pruned
// DFS over injective partial assignments.
struct JpdaOracle {
  std::vector<std::vector<double>> beta;
  std::vector<double> beta_miss;
};

inline JpdaOracle jpda_marginals(const std::vector<std::vector<double>>& likelihood, double p_d,
                                 double lambda) {
  const int nt = static_cast<int>(likelihood.size());
  const int nd = nt > 0 ? static_cast<int>(likelihood[0].size()) : 0;
  JpdaOracle out;
  out.beta.assign(nt, std::vector<double>(nd, 0.0));
  out.beta_miss.assign(nt, 0.0);

  std::vector<int> choice(nt, -1);
  double total = 0.0;
  const long long combos = static_cast<long long>(std::pow(nd + 1, nt));
  for (long long code = 0; code < combos; ++code) {
    long long c = code;
    bool valid = true;
    std::set<int> used;
    for (int t = 0; t < nt; ++t) {
      choice[t] = static_cast<int>(c % (nd + 1)) - 1;  // -1 = miss
      c /= (nd + 1);
      if (choice[t] >= 0) {
        if (used.count(choice[t]) || likelihood[t][choice[t]] <= 0.0) {
          valid = false;
          break;
        }
        used.insert(choice[t]);
      }
    }
    if (!valid) continue;
    double w = 1.0;
    for (int t = 0; t < nt; ++t) {
      w *= choice[t] >= 0 ? p_d * likelihood[t][choice[t]] : (1.0 - p_d);
    }
    for (int j = 0; j < nd; ++j) {
      if (!used.count(j)) w *= lambda;
    }
    total += w;
    for (int t = 0; t < nt; ++t) {
      if (choice[t] >= 0) {
        out.beta[t][choice[t]] += w;
      } else {
        out.beta_miss[t] += w;
      }
    }
  }
  if (total > 0) {
    for (int t = 0; t < nt; ++t) {
      out.beta_miss[t] /= total;
      for (int j = 0; j < nd; ++j) out.beta[t][j] /= total;
    }
  }
  return out;
}

// --- SVM dual by projected gradient ascent -------------------------------------

// Maximizes the Wolfe dual under 0 <= a <= C, sum(a*y) = 0 by projected
// gradient: each step projects onto the box-hyperplane intersection via
// bisection on the hyperplane multiplier.
inline std::vector<double> qp_reference_alphas(const std::vector<std::vector<double>>& x,
                                               const std::vector<int>& y, double cost,
                                               double gamma, int iterations = 200000,
                                               double step = 1e-2) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd q(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double d2 = 0;
      for (size_t k = 0; k < x[i].size(); ++k) {
        const double d = x[i][k] - x[j][k];
        d2 += d * d;
      }
      q(i, j) = y[i] * y[j] * std::exp(-gamma * d2);
    }
  }
  Eigen::VectorXd yv(n);
  for (int i = 0; i < n; ++i) yv(i) = y[i];

  auto project = [&](Eigen::VectorXd a) {
    // find nu such that clamp(a - nu*y, 0, C) . y == 0
    double lo = -1e6, hi = 1e6;
    for (int it = 0; it < 200; ++it) {
      const double nu = 0.5 * (lo + hi);
      double s = 0;
      for (int i = 0; i < n; ++i) {
        s += std::clamp(a(i) - nu * yv(i), 0.0, cost) * yv(i);
      }
      if (s > 0) {
        lo = nu;
      } else {
        hi = nu;
      }
    }
    const double nu = 0.5 * (lo + hi);
    for (int i = 0; i < n; ++i) a(i) = std::clamp(a(i) - nu * yv(i), 0.0, cost);
    return a;
  };

  Eigen::VectorXd a = project(Eigen::VectorXd::Zero(n));
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - q * a;  // dW/da
    a = project(a + step * grad);
  }
  return {a.data(), a.data() + n};
}

inline double qp_dual_objective(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y, const std::vector<double>& alpha,
                                double gamma) {
  const int n = static_cast<int>(x.size());
  double lin = 0, quad = 0;
  for (int i = 0; i < n; ++i) {
    lin += alpha[i];
    for (int j = 0; j < n; ++j) {
      double d2 = 0;
      for (size_t k = 0; k < x[i].size(); ++k) {
        const double d = x[i][k] - x[j][k];
        d2 += d * d;
      }
      quad += alpha[i] * alpha[j] * y[i] * y[j] * std::exp(-gamma * d2);
    }
  }
  return 0.5 * quad - lin;  // minimized form, matches svm_dual_objective
}

}  // namespace oracle

#endif
