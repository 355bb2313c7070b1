#include "scrubber/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <stdexcept>

using json = nlohmann::json;

namespace scrubber {

namespace {

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
  double d2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

// Dense kernel matrix; training sets here are desk-scale.
std::vector<double> kernel_matrix(const std::vector<std::vector<double>>& x, double gamma) {
  const size_t n = x.size();
  std::vector<double> k(n * n);
  for (size_t i = 0; i < n; ++i) {
    k[i * n + i] = 1.0;
    for (size_t j = i + 1; j < n; ++j) {
      const double v = rbf(x[i], x[j], gamma);
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }
  return k;
}

// Platt's sigmoid fit, Lin/Weng/Keerthi Newton variant. Returns (A, B) for
// p = 1 / (1 + exp(A * decision + B)).
std::pair<double, double> fit_sigmoid(const std::vector<double>& decisions,
                                      const std::vector<int>& labels) {
  const size_t n = decisions.size();
  double prior1 = 0, prior0 = 0;
  for (int y : labels) (y > 0 ? prior1 : prior0) += 1.0;

  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);
  std::vector<double> t(n);
  for (size_t i = 0; i < n; ++i) t[i] = labels[i] > 0 ? hi_target : lo_target;

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const int max_iter = 100;
  const double min_step = 1e-10, sigma = 1e-12, eps = 1e-5;

  auto objective = [&](double pa, double pb) {
    double f = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double fApB = decisions[i] * pa + pb;
      if (fApB >= 0) {
        f += t[i] * fApB + std::log1p(std::exp(-fApB));
      } else {
        f += (t[i] - 1) * fApB + std::log1p(std::exp(fApB));
      }
    }
    return f;
  };

  double fval = objective(a, b);
  for (int it = 0; it < max_iter; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0, g1 = 0, g2 = 0;
    for (size_t i = 0; i < n; ++i) {
      const double fApB = decisions[i] * a + b;
      double p, q;
      if (fApB >= 0) {
        p = std::exp(-fApB) / (1.0 + std::exp(-fApB));
        q = 1.0 / (1.0 + std::exp(-fApB));
      } else {
        p = 1.0 / (1.0 + std::exp(fApB));
        q = std::exp(fApB) / (1.0 + std::exp(fApB));
      }
      const double d2 = p * q;
      h11 += decisions[i] * decisions[i] * d2;
      h22 += d2;
      h21 += decisions[i] * d2;
      const double d1 = t[i] - p;
      g1 += decisions[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < eps && std::abs(g2) < eps) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;

    double step = 1.0;
    while (step >= min_step) {
      const double na = a + step * da, nb = b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        a = na;
        b = nb;
        fval = nf;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;
  }
  return {a, b};
}

struct Solved {
  std::vector<double> alpha;
  double bias;
};

Solved smo_on_kernel(const std::vector<double>& k, const std::vector<int>& y, double cost,
                     double tolerance) {
  const size_t n = y.size();
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // G_i = (Q alpha)_i - 1

  auto q = [&](size_t i, size_t j) { return y[i] * y[j] * k[i * n + j]; };

  const size_t max_iter = std::max<size_t>(10000000 / std::max<size_t>(n, 1), 200 * n);
  for (size_t iter = 0; iter < max_iter; ++iter) {
    // maximal violating pair
    double m_up = -std::numeric_limits<double>::infinity();
    double m_low = std::numeric_limits<double>::infinity();
    ptrdiff_t i = -1, j = -1;
    for (size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      const bool in_up = (y[t] > 0 && alpha[t] < cost) || (y[t] < 0 && alpha[t] > 0);
      const bool in_low = (y[t] < 0 && alpha[t] < cost) || (y[t] > 0 && alpha[t] > 0);
      if (in_up && v > m_up) {
        m_up = v;
        i = static_cast<ptrdiff_t>(t);
      }
      if (in_low && v < m_low) {
        m_low = v;
        j = static_cast<ptrdiff_t>(t);
      }
    }
    if (i < 0 || j < 0 || m_up - m_low <= tolerance) break;

    const size_t ii = static_cast<size_t>(i), jj = static_cast<size_t>(j);
    const double old_ai = alpha[ii], old_aj = alpha[jj];
    if (y[ii] != y[jj]) {
      double eta = k[ii * n + ii] + k[jj * n + jj] + 2.0 * k[ii * n + jj];
      if (eta <= 0) eta = 1e-12;
      const double delta = -(grad[ii] + grad[jj]) / eta;
      const double diff = alpha[ii] - alpha[jj];
      alpha[ii] += delta;
      alpha[jj] += delta;
      if (diff > 0) {
        if (alpha[jj] < 0) { alpha[jj] = 0; alpha[ii] = diff; }
        if (alpha[ii] > cost) { alpha[ii] = cost; alpha[jj] = cost - diff; }
      } else {
        if (alpha[ii] < 0) { alpha[ii] = 0; alpha[jj] = -diff; }
        if (alpha[jj] > cost) { alpha[jj] = cost; alpha[ii] = cost + diff; }
      }
    } else {
      double eta = k[ii * n + ii] + k[jj * n + jj] - 2.0 * k[ii * n + jj];
      if (eta <= 0) eta = 1e-12;
      const double delta = (grad[ii] - grad[jj]) / eta;
      const double sum = alpha[ii] + alpha[jj];
      alpha[ii] -= delta;
      alpha[jj] += delta;
      if (sum > cost) {
        if (alpha[ii] > cost) { alpha[ii] = cost; alpha[jj] = sum - cost; }
        if (alpha[jj] > cost) { alpha[jj] = cost; alpha[ii] = sum - cost; }
      } else {
        if (alpha[jj] < 0) { alpha[jj] = 0; alpha[ii] = sum; }
        if (alpha[ii] < 0) { alpha[ii] = 0; alpha[jj] = sum; }
      }
    }

    const double d_i = alpha[ii] - old_ai, d_j = alpha[jj] - old_aj;
    if (d_i == 0.0 && d_j == 0.0) break;
    for (size_t t = 0; t < n; ++t) {
      grad[t] += q(t, ii) * d_i + q(t, jj) * d_j;
    }
  }

  // rho from the free support vectors, else midpoint of the violating bounds
  double rho_sum = 0.0;
  int rho_count = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (size_t t = 0; t < n; ++t) {
    const double ygrad = y[t] * grad[t];
    if (alpha[t] > 1e-12 && alpha[t] < cost - 1e-12) {
      rho_sum += ygrad;
      ++rho_count;
    } else {
      const bool in_up = (y[t] > 0 && alpha[t] < cost) || (y[t] < 0 && alpha[t] > 0);
      if (in_up) {
        ub = std::min(ub, ygrad);
      } else {
        lb = std::max(lb, ygrad);
      }
    }
  }
  double rho;
  if (rho_count > 0) {
    rho = rho_sum / rho_count;
  } else if (std::isfinite(ub) && std::isfinite(lb)) {
    rho = (ub + lb) / 2.0;
  } else {
    rho = 0.0;
  }
  return {std::move(alpha), -rho};
}

}  // namespace

std::pair<std::vector<double>, double> smo_solve(const std::vector<std::vector<double>>& x,
                                                 const std::vector<int>& y, double cost,
                                                 double gamma, double tolerance) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("bad SMO input");
  const auto k = kernel_matrix(x, gamma);
  auto solved = smo_on_kernel(k, y, cost, tolerance);
  return {std::move(solved.alpha), solved.bias};
}

double svm_dual_objective(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          const std::vector<double>& alpha, double gamma) {
  const size_t n = x.size();
  double quad = 0.0, lin = 0.0;
  for (size_t i = 0; i < n; ++i) {
    lin += alpha[i];
    for (size_t j = 0; j < n; ++j) {
      quad += alpha[i] * alpha[j] * y[i] * y[j] * rbf(x[i], x[j], gamma);
    }
  }
  return 0.5 * quad - lin;
}

namespace {

double decision_on(const std::vector<std::vector<double>>& sv, const std::vector<double>& coef,
                   double bias, double gamma, const std::vector<double>& x) {
  double d = bias;
  for (size_t i = 0; i < sv.size(); ++i) d += coef[i] * rbf(sv[i], x, gamma);
  return d;
}

struct FitResult {
  std::vector<std::vector<double>> sv;
  std::vector<double> coef;
  double bias = 0.0;
};

FitResult fit_once(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                   double cost, double gamma) {
  auto [alpha, bias] = smo_solve(x, y, cost, gamma);
  FitResult r;
  r.bias = bias;
  for (size_t i = 0; i < x.size(); ++i) {
    if (alpha[i] > 1e-12) {
      r.sv.push_back(x[i]);
      r.coef.push_back(alpha[i] * y[i]);
    }
  }
  return r;
}

}  // namespace

SvmModel svm_train(const std::vector<SvmExample>& examples, const SvmGrid& grid, int folds,
                   SvmTrainReport* report) {
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (examples.size() < static_cast<size_t>(folds)) {
    throw std::invalid_argument("fewer examples than folds");
  }
  int n_pos = 0, n_neg = 0;
  for (const auto& e : examples) {
    if (e.label > 0) ++n_pos;
    else if (e.label < 0) ++n_neg;
    else throw std::invalid_argument("labels must be +1/-1");
  }
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("both classes required");

  std::vector<std::vector<double>> raw;
  std::vector<int> y;
  for (const auto& e : examples) {
    raw.push_back(e.features);
    y.push_back(e.label);
  }
  const ScalingRanges scaling = fit_scaling_generic(raw);
  std::vector<std::vector<double>> x;
  x.reserve(raw.size());
  for (const auto& r : raw) x.push_back(apply_scaling(r, scaling));

  // stratified fold assignment, deterministic in input order
  std::vector<int> fold_of(x.size());
  int pos_seen = 0, neg_seen = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    fold_of[i] = (y[i] > 0 ? pos_seen++ : neg_seen++) % folds;
  }

  struct CvOutcome {
    double accuracy = -1.0;
    std::vector<double> oof_decisions;
    std::vector<int> oof_labels;
  };

  auto run_cv = [&](double cost, double gamma) {
    CvOutcome out;
    int correct = 0, counted = 0;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::vector<double>> tx;
      std::vector<int> ty;
      std::vector<size_t> test_idx;
      for (size_t i = 0; i < x.size(); ++i) {
        if (fold_of[i] == f) {
          test_idx.push_back(i);
        } else {
          tx.push_back(x[i]);
          ty.push_back(y[i]);
        }
      }
      if (test_idx.empty()) continue;
      const bool has_pos = std::any_of(ty.begin(), ty.end(), [](int v) { return v > 0; });
      const bool has_neg = std::any_of(ty.begin(), ty.end(), [](int v) { return v < 0; });
      if (!has_pos || !has_neg) continue;  // fold unusable on tiny sets
      const FitResult fit = fit_once(tx, ty, cost, gamma);
      for (size_t i : test_idx) {
        const double d = decision_on(fit.sv, fit.coef, fit.bias, gamma, x[i]);
        out.oof_decisions.push_back(d);
        out.oof_labels.push_back(y[i]);
        if ((d >= 0 ? 1 : -1) == y[i]) ++correct;
        ++counted;
      }
    }
    if (counted > 0) out.accuracy = static_cast<double>(correct) / counted;
    return out;
  };

  // ascending scan makes "ties go to smaller C, then smaller gamma" fall out
  // of strict-improvement selection
  std::vector<double> costs = grid.cost_candidates;
  std::vector<double> gammas = grid.gamma_candidates;
  std::sort(costs.begin(), costs.end());
  std::sort(gammas.begin(), gammas.end());

  double best_cost = costs.front();
  double best_gamma = gammas.front();
  double best_acc = -2.0;
  for (double cost : costs) {
    for (double gamma : gammas) {
      const CvOutcome out = run_cv(cost, gamma);
      double acc = out.accuracy;
      if (acc < 0) {
        // no usable folds (tiny degenerate sets): score by training accuracy
        const FitResult fit = fit_once(x, y, cost, gamma);
        int correct = 0;
        for (size_t i = 0; i < x.size(); ++i) {
          const double d = decision_on(fit.sv, fit.coef, fit.bias, gamma, x[i]);
          if ((d >= 0 ? 1 : -1) == y[i]) ++correct;
        }
        acc = static_cast<double>(correct) / x.size();
      }
      if (report) report->grid.push_back({cost, gamma, acc});
      // strict improvement only: earlier candidates (smaller C, then smaller
      // gamma) win ties because the grids are iterated in ascending order
      if (acc > best_acc) {
        best_acc = acc;
        best_cost = cost;
        best_gamma = gamma;
      }
    }
  }
  if (report) {
    report->best_cost = best_cost;
    report->best_gamma = best_gamma;
    report->best_cv_accuracy = best_acc;
  }

  const FitResult fit = fit_once(x, y, best_cost, best_gamma);

  CvOutcome best_out = run_cv(best_cost, best_gamma);
  if (best_out.oof_decisions.empty()) {
    for (size_t i = 0; i < x.size(); ++i) {
      best_out.oof_decisions.push_back(decision_on(fit.sv, fit.coef, fit.bias, best_gamma, x[i]));
      best_out.oof_labels.push_back(y[i]);
    }
  }
  const auto [prob_a, prob_b] = fit_sigmoid(best_out.oof_decisions, best_out.oof_labels);

  SvmModel model;
  model.gamma = best_gamma;
  model.cost = best_cost;
  model.support_vectors = fit.sv;
  model.dual_coefficients = fit.coef;
  model.bias = fit.bias;
  model.prob_a = prob_a;
  model.prob_b = prob_b;
  model.scaling = scaling;
  return model;
}

double svm_decision(const SvmModel& model, const std::vector<double>& raw_features) {
  if (raw_features.size() != model.dimension()) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  const auto x = apply_scaling(raw_features, model.scaling);
  return decision_on(model.support_vectors, model.dual_coefficients, model.bias, model.gamma, x);
}

SvmPrediction svm_predict(const SvmModel& model, const std::vector<double>& raw_features) {
  SvmPrediction p;
  p.decision = svm_decision(model, raw_features);
  p.label = p.decision >= 0 ? +1 : -1;
  const double fApB = model.prob_a * p.decision + model.prob_b;
  p.probability = fApB >= 0 ? std::exp(-fApB) / (1.0 + std::exp(-fApB))
                            : 1.0 / (1.0 + std::exp(fApB));
  return p;
}

void save_svm_model(const SvmModel& model, const std::string& path) {
  json j;
  j["kernel"] = "rbf";
  j["gamma"] = model.gamma;
  j["cost"] = model.cost;
  j["bias"] = model.bias;
  j["prob_a"] = model.prob_a;
  j["prob_b"] = model.prob_b;
  j["scaling"] = {{"min", model.scaling.min_values}, {"max", model.scaling.max_values}};
  j["support_vectors"] = model.support_vectors;
  j["dual_coefficients"] = model.dual_coefficients;
  // f6 block layout is (mean, std, 25 histogram bins)
  j["feature_layout"] = "f1(1),f2(1),f3(6),f4(6),f5(20),f6(27:mean,std,25bins),f7(10)";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model: " + path);
  out << j.dump(2) << '\n';
}

SvmModel load_svm_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model: " + path);
  json j;
  in >> j;
  SvmModel m;
  m.gamma = j.at("gamma").get<double>();
  m.cost = j.at("cost").get<double>();
  m.bias = j.at("bias").get<double>();
  m.prob_a = j.at("prob_a").get<double>();
  m.prob_b = j.at("prob_b").get<double>();
  m.scaling.min_values = j.at("scaling").at("min").get<std::vector<double>>();
  m.scaling.max_values = j.at("scaling").at("max").get<std::vector<double>>();
  m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
  m.dual_coefficients = j.at("dual_coefficients").get<std::vector<double>>();
  if (m.support_vectors.empty()) throw std::runtime_error("model has no support vectors");
  if (m.gamma <= 0 || m.cost <= 0) throw std::runtime_error("model gamma/cost must be positive");
  return m;
}

namespace {

std::vector<ScoredBox> scored_candidates(const PointCloud3D& cloud,
                                         const HumanDetectorParams& params,
                                         const SvmModel& model, std::vector<Cluster>* kept,
                                         PointCloud3D* processed_out) {
  std::vector<ScoredBox> out;
  if (cloud.empty()) return out;
  const auto& cp = params.clustering;
  PointCloud3D processed = voxel_downsample(cloud, cp.voxel_leaf);
  processed = remove_planes(processed, cp.plane_inlier_threshold, cp.plane_min_inlier_fraction,
                            cp.ransac_seed);
  if (processed.empty()) {
    if (processed_out) *processed_out = std::move(processed);
    return out;
  }
  auto clusters = adaptive_cluster(processed, cp.ring_schedule, cp.min_cluster_size,
                                   cp.max_cluster_size);
  clusters = volumetric_filter(clusters);
  for (auto& c : clusters) {
    const FeatureVector f = extract_features(c, processed);
    const auto pred = svm_predict(model, std::vector<double>(f.begin(), f.end()));
    out.push_back({c.bbox, pred.probability});
    if (kept) kept->push_back(std::move(c));
  }
  if (processed_out) *processed_out = std::move(processed);
  return out;
}

}  // namespace

std::vector<ScoredBox> score_human_candidates(const PointCloud3D& cloud,
                                              const HumanDetectorParams& params,
                                              const SvmModel& model) {
  return scored_candidates(cloud, params, model, nullptr, nullptr);
}

std::vector<Detection> detect_humans_3d(const PointCloud3D& cloud,
                                        const HumanDetectorParams& params, const SvmModel& model,
                                        const Eigen::Isometry3d& world_T_sensor) {
  std::vector<Detection> detections;
  std::vector<Cluster> kept;
  const auto scored = scored_candidates(cloud, params, model, &kept, nullptr);
  for (size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].probability < params.probability_threshold) continue;
    const Eigen::Vector3d world = world_T_sensor * kept[i].centroid;
    Detection det;
    det.position = {world.x(), world.y()};  // centroid projected to the ground plane
    det.covariance = Eigen::Matrix2d::Identity() * (params.position_sigma * params.position_sigma);
    det.source = DetectionSource::lidar3d;
    det.confidence = scored[i].probability;
    det.timestamp = cloud.timestamp;
    detections.push_back(det);
  }
  return detections;
}

}  // namespace scrubber
