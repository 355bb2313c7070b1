// Acceptance suite: one pass/fail line per criterion, runnable on a desk
// machine with no external datasets. Criterion 12 (dataset reproduction)
// needs the released recordings and is reported as SKIP.
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>

#include "oracles.hpp"
#include "scrubber/analytics.hpp"
#include "scrubber/clustering.hpp"
#include "scrubber/dirt.hpp"
#include "scrubber/features.hpp"
#include "scrubber/floor_objects.hpp"
#include "scrubber/legs_rgbd.hpp"
#include "scrubber/rng.hpp"
#include "scrubber/svm.hpp"
#include "scrubber/tracking.hpp"

using namespace scrubber;

namespace {

void report(int criterion, const char* what, bool ok) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", criterion, what);
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", criterion, " failed: ", what);
}

Detection det_at(double x, double y, double sigma = 0.1) {
  Detection d;
  d.position = {x, y};
  d.covariance = Eigen::Matrix2d::Identity() * sigma * sigma;
  return d;
}

}  // namespace

TEST_CASE("criterion 1: clustering oracle equivalence") {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
    Rng rng(seed);
    const int n = 50 + static_cast<int>(rng.uniform_index(451));  // <= 500
    std::vector<Eigen::Vector3d> pts;
    PointCloud3D cloud;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d p(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(0, 2));
      pts.push_back(p);
      cloud.points.push_back({static_cast<float>(p.x()), static_cast<float>(p.y()),
                              static_cast<float>(p.z()), 0.0f});
    }
    const double tol = rng.uniform(0.25, 0.9);
    // the library clusters float-rounded coordinates; feed the oracle the same
    std::vector<Eigen::Vector3d> pts_f;
    for (const auto& p : cloud.points) pts_f.push_back(p.position());
    const auto expected = oracle::brute_force_clusters(pts_f, tol, 1, n);
    std::vector<std::vector<int>> got;
    for (const auto& c : euclidean_cluster(cloud, tol, 1, n)) got.push_back(c.indices);
    std::sort(got.begin(), got.end());
    ok = ok && got == expected;
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ok = ok && elapsed < 5.0;
  char line[128];
  std::snprintf(line, sizeof(line),
                "euclidean_cluster == brute-force union-find on 100 clouds (%.2f s)", elapsed);
  report(1, line, ok);
}

TEST_CASE("criterion 2: UKF/EKF match the closed-form Kalman filter") {
  bool ok = true;
  Rng rng(2);
  for (int seq = 0; seq < 1000 && ok; ++seq) {
    oracle::KalmanState ref{{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-1, 1),
                             rng.uniform(-1, 1)},
                            Eigen::Matrix4d::Identity() * rng.uniform(0.2, 2.0)};
    TrackState ekf;
    ekf.mean = ref.mean;
    ekf.covariance = ref.cov;
    TrackState ukf = ekf;
    const double q = rng.uniform(0.1, 1.0);
    for (int step = 0; step < 15; ++step) {
      const double dt = rng.uniform(0.05, 0.2);
      ref = oracle::kf_predict(ref, dt, q);
      ekf = predict(ekf, dt, q);
      ukf = predict(ukf, dt, q);
      const Eigen::Vector2d z(ref.mean[0] + rng.normal(0, 0.2),
                              ref.mean[1] + rng.normal(0, 0.2));
      const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * rng.uniform(0.005, 0.05);
      ref = oracle::kf_update(ref, z, r);
      Detection d = det_at(z.x(), z.y());
      ekf = update_ekf(ekf, d, r);
      ukf = update_ukf(ukf, d, r);
      ok = ok && (ekf.mean - ref.mean).norm() < 1e-6 && (ukf.mean - ref.mean).norm() < 1e-6 &&
           (ekf.covariance - ref.cov).norm() < 1e-5 && (ukf.covariance - ref.cov).norm() < 1e-5;
    }
  }
  report(2, "UKF and EKF posteriors within 1e-6/1e-5 of closed-form KF on 1000 sequences", ok);
}

TEST_CASE("criterion 3: volumetric filter reproduces the candidate bounds exactly") {
  auto cluster_with = [](double w, double d, double h) {
    Cluster c;
    c.indices = {0};
    c.bbox.extents = {w, d, h};
    return c;
  };
  bool ok = volumetric_filter({cluster_with(0.5, 0.5, 1.7)}).size() == 1 &&
            volumetric_filter({cluster_with(1.5, 0.5, 1.7)}).empty() &&
            volumetric_filter({cluster_with(0.2, 0.2, 0.5)}).size() == 1;
  // exhaustive 0.05 m grid against the direct inequality oracle
  for (int wi = 1; wi <= 24 && ok; ++wi) {
    for (int di = 1; di <= 24 && ok; ++di) {
      for (int hi = 1; hi <= 44; ++hi) {
        const double w = 0.05 * wi, d = 0.05 * di, h = 0.05 * hi;
        const bool expect =
            (0.2 <= w && w <= 1.0) && (0.2 <= d && d <= 1.0) && (0.5 <= h && h <= 2.0);
        const bool got = volumetric_filter({cluster_with(w, d, h)}).size() == 1;
        if (got != expect) {
          ok = false;
          break;
        }
      }
    }
  }
  report(3, "volume rule matches the inequality oracle on a 0.05 m extent grid", ok);
}

TEST_CASE("criterion 4: JPDA marginals match joint-event enumeration") {
  bool ok = true;
  const double sigma2 = 0.3 * 0.3;  // innovation covariance scale
  const double gate_thresh = chi2_threshold_2dof(0.95);
  const Eigen::Vector2d t0(0.0, 0.0), t1(1.0, 0.0);
  std::vector<Eigen::Vector2d> grid;
  for (double x = -1.0; x <= 2.01; x += 0.5) {
    for (double y = -1.0; y <= 1.01; y += 0.5) grid.push_back({x, y});
  }
  auto likelihood_of = [&](const Eigen::Vector2d& track, const Eigen::Vector2d& det) {
    const double d2 = (det - track).squaredNorm() / sigma2;
    if (d2 > gate_thresh) return 0.0;
    return std::exp(-0.5 * d2) / (2.0 * M_PI * sigma2);
  };
  int configurations = 0;
  for (size_t i = 0; i < grid.size() && ok; ++i) {
    for (size_t j = i + 1; j < grid.size(); ++j) {
      const std::vector<std::vector<double>> lh = {
          {likelihood_of(t0, grid[i]), likelihood_of(t0, grid[j])},
          {likelihood_of(t1, grid[i]), likelihood_of(t1, grid[j])}};
      if (lh[0][0] + lh[0][1] + lh[1][0] + lh[1][1] == 0.0) continue;  // nothing gated
      ++configurations;
      const JpdaResult got = associate_nnjpda(lh, 0.9, 0.05);
      const oracle::JpdaOracle ref = oracle::jpda_marginals(lh, 0.9, 0.05);
      for (int t = 0; t < 2; ++t) {
        double row = got.beta_miss[t];
        if (std::abs(got.beta_miss[t] - ref.beta_miss[t]) >= 1e-9) ok = false;
        for (int d = 0; d < 2; ++d) {
          if (std::abs(got.beta[t][d] - ref.beta[t][d]) >= 1e-9) ok = false;
          row += got.beta[t][d];
        }
        if (std::abs(row - 1.0) >= 1e-9) ok = false;
      }
      if (!ok) break;
    }
  }
  ok = ok && configurations > 100;
  char line[128];
  std::snprintf(line, sizeof(line),
                "beta marginals within 1e-9 of enumeration on %d 2x2 configurations",
                configurations);
  report(4, line, ok);
}

TEST_CASE("criterion 5: chi-square gate calibration") {
  Rng rng(5);
  TrackState track;
  track.mean.setZero();
  track.covariance = Eigen::Matrix4d::Identity() * 0.25;
  const Eigen::Matrix2d r = Eigen::Matrix2d::Identity() * 0.04;
  const Eigen::Matrix2d s = track.covariance.topLeftCorner<2, 2>() + r;
  const Eigen::Matrix2d l = Eigen::LLT<Eigen::Matrix2d>(s).matrixL();
  int accepted = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const Eigen::Vector2d z = l * Eigen::Vector2d(rng.normal(), rng.normal());
    if (gate(track, det_at(z.x(), z.y()), r, 0.95).accept) ++accepted;
  }
  const double rate = static_cast<double>(accepted) / trials;
  const bool ok = rate >= 0.93 && rate <= 0.97 &&
                  std::abs(chi2_threshold_2dof(0.95) - 5.991464547107982) < 1e-9;
  char line[128];
  std::snprintf(line, sizeof(line),
                "true detections accepted at %.1f%% (target 95%% +/- 2%%, threshold 5.991)",
                100.0 * rate);
  report(5, line, ok);
}

TEST_CASE("criterion 6: SVM optimality, CV accuracy, feature dimensionality") {
  bool ok = true;
  // SMO vs projected-gradient QP on <= 50-point sets
  Rng rng(6);
  for (int trial = 0; trial < 3 && ok; ++trial) {
    const int n = 20 + static_cast<int>(rng.uniform_index(31));
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      const int label = i % 2 == 0 ? +1 : -1;
      x.push_back({rng.normal(label * 0.7, 1.0), rng.normal(-label * 0.4, 1.0)});
      y.push_back(label);
    }
    const double cost = trial == 0 ? 1.0 : 10.0, gamma = 0.5;
    const auto [alpha, bias] = smo_solve(x, y, cost, gamma);
    const double smo_obj = svm_dual_objective(x, y, alpha, gamma);
    const double ref_obj =
        oracle::qp_dual_objective(x, y, oracle::qp_reference_alphas(x, y, cost, gamma), gamma);
    ok = ok && std::abs(smo_obj - ref_obj) / std::max(1.0, std::abs(ref_obj)) < 1e-4;
  }
  // two-Gaussian CV accuracy
  std::vector<SvmExample> ex;
  for (int i = 0; i < 100; ++i) {
    ex.push_back({{rng.normal(0, 1), rng.normal(0, 1)}, -1});
    ex.push_back({{rng.normal(4, 1), rng.normal(4, 1)}, +1});
  }
  SvmTrainReport rep;
  svm_train(ex, {{0.1, 1.0, 10.0}, {0.01, 0.1, 1.0}}, 5, &rep);
  ok = ok && rep.best_cv_accuracy >= 0.95;
  // feature extractor: exactly 71 finite dims on 1000 random clusters
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    PointCloud3D cloud;
    const int n = 1 + static_cast<int>(rng.uniform_index(80));
    for (int i = 0; i < n; ++i) {
      cloud.points.push_back({static_cast<float>(rng.uniform(-10, 10)),
                              static_cast<float>(rng.uniform(-10, 10)),
                              static_cast<float>(rng.uniform(-2, 2)),
                              static_cast<float>(rng.uniform(0, 255))});
    }
    Cluster c;
    c.indices.resize(cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) c.indices[i] = static_cast<int>(i);
    c.bbox = bounding_box(cloud.points);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (const auto& p : cloud.points) sum += p.position();
    c.centroid = sum / static_cast<double>(cloud.size());
    const FeatureVector f = extract_features(c, cloud);
    ok = ok && f.size() == 71;
    for (double v : f) ok = ok && std::isfinite(v);
  }
  report(6, "SMO within 1e-4 of QP; two-Gaussian CV >= 0.95; 71 finite dims x 1000", ok);
}

TEST_CASE("criterion 7: camera leg-pairing thresholds pinned") {
  RgbdLegParams params;
  params.voxel_leaf = 0.01;
  params.min_cluster_size = 5;
  const Eigen::Isometry3d eye = Eigen::Isometry3d::Identity();

  auto legs = [&](double separation, bool same_color) {
    ColoredCloud cloud;
    const double leg_r = 0.136, height = 0.549;
    for (int leg = 0; leg < 2; ++leg) {
      const double sign = leg == 0 ? 1.0 : -1.0;
      const Eigen::Vector2d c(1.5, 0.2 + sign * separation / 2.0);
      for (int ring = 0; ring < 12; ++ring) {
        const double z = height * ring / 11.0;
        for (int k = 0; k < 16; ++k) {
          const double a = 2.0 * M_PI * k / 16.0;
          ColoredPoint p;
          p.x = static_cast<float>(c.x() + leg_r * std::cos(a));
          p.y = static_cast<float>(c.y() + leg_r * std::sin(a));
          p.z = static_cast<float>(z);
          const bool red = same_color || leg == 0;
          p.r = red ? 200 : 40;
          p.g = 40;
          p.b = red ? 40 : 200;
          cloud.points.push_back(p);
        }
      }
    }
    return cloud;
  };

  const auto accepted = detect_legs_rgbd(legs(0.4, true), params, eye);
  bool ok = accepted.size() == 1 &&
            std::abs(accepted[0].position.x() - 1.5) < 1e-6 &&
            std::abs(accepted[0].position.y() - 0.2) < 1e-6;
  ok = ok && detect_legs_rgbd(legs(0.4, false), params, eye).empty();   // color rule
  ok = ok && detect_legs_rgbd(legs(1.5, true), params, eye).empty();    // distance rule
  // threshold boundaries at +/- 1e-6
  ok = ok && leg_pair_admissible(0.8 + 1e-6, 0.5, params) &&
       !leg_pair_admissible(0.8 - 1e-6, 0.5, params) && !leg_pair_admissible(0.8, 0.5, params) &&
       leg_pair_admissible(0.9, 1.0 - 1e-6, params) &&
       !leg_pair_admissible(0.9, 1.0 + 1e-6, params) && !leg_pair_admissible(0.9, 1.0, params);
  report(7, "pair accepted / color-rejected / distance-rejected; 0.8 and 1.0 m at +/-1e-6", ok);
}

TEST_CASE("criterion 8: dirt pipeline suite") {
  bool ok = true;
  // EM log-likelihood monotone on 100 seeded runs
  for (uint64_t seed = 1; seed <= 100 && ok; ++seed) {
    Rng rng(seed);
    std::vector<Eigen::Vector2d> samples;
    const int n = 60 + static_cast<int>(rng.uniform_index(200));
    for (int i = 0; i < n; ++i) samples.push_back({rng.uniform(0, 5), rng.uniform(0, 2)});
    GmmFitInfo info;
    fit_gmm(samples, 3, seed, &info);
    for (size_t i = 1; i < info.log_likelihood_per_iteration.size(); ++i) {
      if (info.log_likelihood_per_iteration[i] <
          info.log_likelihood_per_iteration[i - 1] - 1e-9) {
        ok = false;
        break;
      }
    }
  }
  const bool em_ok = ok;

  // uniform-image null property
  ColorFrame uniform;
  uniform.width = 160;
  uniform.height = 128;
  uniform.rgb.assign(static_cast<size_t>(160) * 128 * 3, 133);
  const FloatImage3 lab = rgb_to_lab(uniform);
  const std::vector<uint8_t> floor_mask(static_cast<size_t>(160) * 128, 1);
  const std::vector<uint8_t> object_mask(static_cast<size_t>(160) * 128, 0);
  const BlockGrid grid = gradient_blocks(lab, floor_mask, object_mask, 16);
  const auto models = fit_block_models(grid, 3, 1);
  const auto scores = score_blocks(grid, models);
  const auto mask = dirt_mask(scores, {});
  bool null_ok = true;
  for (uint8_t m : mask) null_ok = null_ok && m == 0;
  ok = ok && null_ok;

  // step-edge block statistics match pixel arithmetic exactly
  ColorFrame edge = uniform;
  for (int v = 0; v < edge.height; ++v) {
    for (int u = 8; u < edge.width; ++u) {
      uint8_t* px = edge.pixel(u, v);
      px[0] = px[1] = px[2] = 173;
    }
  }
  const FloatImage3 lab_edge = rgb_to_lab(edge);
  const BlockGrid eg = gradient_blocks(lab_edge, floor_mask, object_mask, 16);
  bool edge_ok = true;
  for (int c = 0; c < 3 && edge_ok; ++c) {
    double sum = 0.0, sq = 0.0;
    for (int v = 0; v < 16; ++v) {
      for (int u = 0; u < 16; ++u) {
        const int ul = std::max(u - 1, 0), ur = std::min(u + 1, edge.width - 1);
        const int vt = std::max(v - 1, 0), vb = std::min(v + 1, edge.height - 1);
        const double gx = (lab_edge.pixel(ur, v)[c] - lab_edge.pixel(ul, v)[c]) / (ur - ul);
        const double gy = (lab_edge.pixel(u, vb)[c] - lab_edge.pixel(u, vt)[c]) / (vb - vt);
        const double g = std::sqrt(gx * gx + gy * gy);
        sum += g;
        sq += g * g;
      }
    }
    const double mean = sum / 256.0;
    const double stddev = std::sqrt(std::max(sq / 256.0 - mean * mean, 0.0));
    edge_ok = std::abs(eg.at(0, 0).mean[c] - mean) < 1e-12 &&
              std::abs(eg.at(0, 0).stddev[c] - stddev) < 1e-12;
  }
  ok = ok && edge_ok;

  // 5-window median filter: spike removed, 3-of-5 retained
  TemporalMedianFilter f1(5);
  const TemporalMedianFilter::CellKey cell{0, 0};
  bool median_ok = true;
  for (int v : {0, 0, 1, 0, 0}) {
    if (f1.push({{cell, v != 0}})[0].second) median_ok = false;
  }
  TemporalMedianFilter f2(5);
  bool last = false;
  for (int v : {1, 1, 1, 0, 0}) last = f2.push({{cell, v != 0}})[0].second;
  median_ok = median_ok && last;
  ok = ok && median_ok;

  char line[160];
  std::snprintf(line, sizeof(line),
                "EM monotone (%s), uniform null (%s), step-edge exact (%s), median 5 (%s)",
                em_ok ? "ok" : "FAIL", null_ok ? "ok" : "FAIL", edge_ok ? "ok" : "FAIL",
                median_ok ? "ok" : "FAIL");
  report(8, line, ok);
}

TEST_CASE("criterion 9: floor objects, 2 cm at 1.2 m, clean-floor null") {
  auto render = [](double cam_height, uint64_t seed, double box_height, double bw) {
    DepthFrame f;
    f.width = 160;
    f.height = 120;
    f.intrinsics = {140.0, 140.0, 79.5, 59.5};
    f.depth.resize(static_cast<size_t>(160) * 120);
    Rng rng(seed);
    const NoiseModel nm;
    for (int v = 0; v < 120; ++v) {
      for (int u = 0; u < 160; ++u) {
        const double dx = (u - f.intrinsics.cx) / f.intrinsics.fx;
        const double dy = (v - f.intrinsics.cy) / f.intrinsics.fy;
        double z = cam_height;
        if (box_height > 0.0 && std::abs(dx * (cam_height - box_height)) <= bw / 2 &&
            std::abs(dy * (cam_height - box_height)) <= bw / 2) {
          z = cam_height - box_height;
        }
        f.depth[static_cast<size_t>(v) * 160 + u] =
            static_cast<float>(z + rng.normal(0.0, nm.sigma(z)));
      }
    }
    return f;
  };

  // the 2 cm box at 1.2 m clears the threshold: 3 sigma(1.2) = 0.00726 m
  const NoiseModel nm;
  bool ok = nm.k * nm.sigma(1.2) < 0.02;
  const DepthFrame with_box = render(1.2, 9, 0.02, 0.3);
  const FloorFit fit = fit_floor(with_box);
  const ObjectDetection det = detect_objects(with_box, fit.model);
  ok = ok && det.boxes.size() == 1;

  // flat-floor null scene: zero obstacle pixels over 100 seeded renders
  int obstacle_pixels = 0;
  for (uint64_t seed = 100; seed < 200; ++seed) {
    const DepthFrame flat = render(0.72, seed, 0.0, 0.0);
    const ObjectDetection d = detect_objects(flat, fit_floor(flat).model);
    for (uint8_t m : d.mask) {
      if (m == kMaskObstacle) ++obstacle_pixels;
    }
  }
  ok = ok && obstacle_pixels == 0;
  char line[128];
  std::snprintf(line, sizeof(line),
                "2 cm box at 1.2 m detected; %d obstacle px over 100 clean renders",
                obstacle_pixels);
  report(9, line, ok);
}

TEST_CASE("criterion 10: IoU against the 1 mm voxel oracle") {
  BoundingBox3D a, b;
  a.center = {0, 0, 0};
  a.extents = {1, 1, 1};
  b.center = {0.5, 0, 0};
  b.extents = {1, 1, 1};
  bool ok = iou3d(a, b) == 1.0 / 3.0;  // exact

  Rng rng(10);
  auto mm = [&](double lo, double hi) {
    return std::round(rng.uniform(lo, hi) * 1000.0) / 1000.0;
  };
  int overlapping = 0;
  while (overlapping < 1000 && ok) {
    const Eigen::Vector3d lo1(mm(0, 1), mm(0, 1), mm(0, 1));
    const Eigen::Vector3d e1(mm(0.1, 0.9), mm(0.1, 0.9), mm(0.1, 0.9));
    const Eigen::Vector3d lo2 =
        lo1 + Eigen::Vector3d(mm(-0.2, 0.2), mm(-0.2, 0.2), mm(-0.2, 0.2));
    const Eigen::Vector3d e2(mm(0.1, 0.9), mm(0.1, 0.9), mm(0.1, 0.9));
    const BoundingBox3D ba = BoundingBox3D::from_min_max(lo1, lo1 + e1);
    const BoundingBox3D bb = BoundingBox3D::from_min_max(lo2, lo2 + e2);
    if (iou3d(ba, bb) <= 0.0) continue;
    ++overlapping;
    const double ref = oracle::voxel_iou({ba.min(), ba.max()}, {bb.min(), bb.max()});
    ok = ok && std::abs(iou3d(ba, bb) - ref) < 1e-3;
  }
  report(10,
         "unit-cube offset case = 1/3 exactly; 1000 random overlapping pairs within 1e-3 of "
         "voxels",
         ok);
}

TEST_CASE("criterion 11: end-to-end synthetic tracking over 50 seeds") {
  const double rate = 10.0, duration = 10.0;
  const double p_d = 0.95, sigma = 0.1;
  int seeds_with_three = 0;
  double rmse_sum = 0.0;
  int rmse_seeds = 0;

  for (uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(seed);
    TrackerConfig cfg;  // defaults: EKF + greedy NN, lidar sigma 0.1
    Tracker tracker(cfg);

    const Eigen::Vector2d starts[3] = {{-6.0, 0.0}, {6.0, 0.4}, {0.2, -6.0}};
    const Eigen::Vector2d vels[3] = {{1.2, 0.0}, {-1.2, 0.0}, {0.0, 1.2}};

    bool always_three = true;
    double err2 = 0.0;
    int err_n = 0;
    const int steps = static_cast<int>(duration * rate);
    for (int k = 0; k < steps; ++k) {
      const double t = k / rate;
      std::vector<Detection> dets;
      Eigen::Vector2d truth[3];
      for (int w = 0; w < 3; ++w) {
        truth[w] = starts[w] + t * vels[w];
        if (rng.uniform() < p_d) {
          Detection d = det_at(truth[w].x() + rng.normal(0, sigma),
                               truth[w].y() + rng.normal(0, sigma), sigma);
          d.timestamp = t;
          dets.push_back(d);
        }
      }
      const auto confirmed = tracker.step(dets, t);
      if (t >= 1.0) {  // steady state
        if (confirmed.size() != 3) always_three = false;
        for (const auto& tr : confirmed) {
          double best = std::numeric_limits<double>::infinity();
          for (int w = 0; w < 3; ++w) {
            best = std::min(best, (tr.position() - truth[w]).squaredNorm());
          }
          err2 += best;
          ++err_n;
        }
      }
    }
    if (always_three) ++seeds_with_three;
    if (err_n > 0) {
      rmse_sum += std::sqrt(err2 / err_n);
      ++rmse_seeds;
    }
  }
  const double mean_rmse = rmse_sum / std::max(rmse_seeds, 1);
  const double frac_three = seeds_with_three / 50.0;
  const bool ok = mean_rmse < 0.15 && frac_three >= 0.90;
  char line[160];
  std::snprintf(line, sizeof(line),
                "3 crossing walkers: mean RMSE %.3f m (< 0.15), %0.f%% of seeds exactly 3 tracks "
                "(>= 90%%)",
                mean_rmse, 100.0 * frac_three);
  report(11, line, ok);
}

TEST_CASE("criterion 12: dataset reproduction tier (optional)") {
  std::printf(
      "[SKIP] criterion 12: optional dataset tier needs the released airport/warehouse/"
      "supermarket recordings; convert them to the sequence format and run the evaluate "
      "subcommand to compare against the published table (airport accuracy 0.89 / precision "
      "0.38 / recall 0.84 / F1 0.52)\n");
  CHECK(true);
}
