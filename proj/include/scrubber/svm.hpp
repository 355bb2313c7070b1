#ifndef SCRUBBER_SVM_HPP
#define SCRUBBER_SVM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "scrubber/clustering.hpp"
#include "scrubber/detection.hpp"
#include "scrubber/features.hpp"

namespace scrubber {

/// RBF-kernel soft-margin SVM with Platt-style probability calibration.
/// Inputs are expected in the scaled feature space; the model carries the
/// scaling ranges so prediction can start from raw features.
struct SvmModel {
  double gamma = 0.1;
  double cost = 1.0;
  std::vector<std::vector<double>> support_vectors;  // scaled space
  std::vector<double> dual_coefficients;             // alpha_i * y_i
  double bias = 0.0;
  // probability = 1 / (1 + exp(A * decision + B)); A < 0 for calibrated models
  double prob_a = -1.0;
  double prob_b = 0.0;
  ScalingRanges scaling;
  size_t dimension() const { return scaling.min_values.size(); }
};

struct SvmExample {
  std::vector<double> features;  // raw (unscaled)
  int label = 0;                 // +1 / -1
};

struct SvmGrid {
  std::vector<double> cost_candidates = {0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_candidates = {0.01, 0.1, 1.0};
};

struct SvmTrainReport {
  struct GridPoint {
    double cost, gamma, cv_accuracy;
  };
  std::vector<GridPoint> grid;
  double best_cost = 0.0, best_gamma = 0.0, best_cv_accuracy = 0.0;
};

/// Solves the RBF soft-margin dual by SMO with maximal-violating-pair
/// selection to KKT tolerance 1e-3. Deterministic pivot order.
/// Returns (alphas, bias); alphas are the raw dual variables in [0, C].
std::pair<std::vector<double>, double> smo_solve(const std::vector<std::vector<double>>& x,
                                                 const std::vector<int>& y, double cost,
                                                 double gamma, double tolerance = 1e-3);

/// LIBSVM-flavored dual objective 0.5 a'Qa - e'a for a solved alpha vector;
/// used by the optimality checks.
double svm_dual_objective(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          const std::vector<double>& alpha, double gamma);

/// Grid search by k-fold cross validation (ties: smaller C, then smaller
/// gamma), final SMO fit on the full set at the winner, sigmoid calibration
/// fitted on out-of-fold decision values.
SvmModel svm_train(const std::vector<SvmExample>& examples, const SvmGrid& grid, int folds = 5,
                   SvmTrainReport* report = nullptr);

/// Decision value sum_i coef_i K(sv_i, x_scaled) + bias (input raw features).
double svm_decision(const SvmModel& model, const std::vector<double>& raw_features);

struct SvmPrediction {
  int label = 0;          // +1 / -1
  double probability = 0; // P(label == +1)
  double decision = 0;
};

SvmPrediction svm_predict(const SvmModel& model, const std::vector<double>& raw_features);

void save_svm_model(const SvmModel& model, const std::string& path);
SvmModel load_svm_model(const std::string& path);

/// Full 3D-lidar human detector: adaptive clustering, volumetric candidate
/// filter, feature extraction/scaling, probabilistic SVM, thresholding.
struct HumanDetectorParams {
  ClusteringParams clustering;
  double probability_threshold = 0.5;
  double position_sigma = 0.1;  // detection covariance = sigma^2 I
};

/// world_T_sensor places the sensor-frame cloud in world coordinates.
std::vector<Detection> detect_humans_3d(const PointCloud3D& cloud,
                                        const HumanDetectorParams& params, const SvmModel& model,
                                        const Eigen::Isometry3d& world_T_sensor);

/// The candidate boxes (before classification) with their human probability;
/// used by the evaluation pipeline, which scores candidates against GT boxes.
struct ScoredBox {
  BoundingBox3D box;  // sensor frame
  double probability = 0.0;
};
std::vector<ScoredBox> score_human_candidates(const PointCloud3D& cloud,
                                              const HumanDetectorParams& params,
                                              const SvmModel& model);

}  // namespace scrubber

#endif
