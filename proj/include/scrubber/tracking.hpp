#ifndef SCRUBBER_TRACKING_HPP
#define SCRUBBER_TRACKING_HPP

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "scrubber/detection.hpp"

namespace scrubber {

using StateVector = Eigen::Vector4d;   // [x, y, vx, vy]
using StateMatrix = Eigen::Matrix4d;

enum class TrackStatus : uint8_t { tentative, confirmed, deleted };
enum class AssociationMode : uint8_t { nearest_neighbor, nnjpda };
enum class FilterKind : uint8_t { ekf, ukf };

struct TrackState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();
  int id = -1;
  TrackStatus status = TrackStatus::tentative;
  double last_update = 0.0;
  std::vector<double> hit_times;  // recent supporting detections (initiation window)
  struct HistoryPoint {
    double timestamp;
    Eigen::Vector2d position;
  };
  std::vector<HistoryPoint> history;
  std::set<DetectionSource> sources;

  Eigen::Vector2d position() const { return mean.head<2>(); }
  Eigen::Vector2d velocity() const { return mean.tail<2>(); }
};

struct TrackerConfig {
  double process_noise_intensity = 0.5;  // q, m^2/s^3 (white acceleration)
  std::map<DetectionSource, double> observation_sigma = {
      {DetectionSource::lidar3d, 0.1},
      {DetectionSource::rgbd_upper_body, 0.15},
      {DetectionSource::rgbd_legs, 0.15},
      {DetectionSource::laser_legs, 0.2}};
  bool use_detection_covariance = false;  // true: R comes from the Detection
  double gate_probability = 0.95;
  AssociationMode association = AssociationMode::nearest_neighbor;
  FilterKind filter = FilterKind::ekf;
  int confirm_hits = 3;          // M
  double confirm_window = 1.0;   // N seconds
  double deletion_timeout = 2.0; // seconds without an update
  double clutter_density = 0.05; // lambda, 1/m^2 (JPDA)
  double detection_probability = 0.9;  // P_D (JPDA)
  double initial_velocity_sigma = 1.0;
  int jpda_max_component = 10;   // tracks x detections cap per component
};

/// chi-square quantile with 2 dof has the closed form -2 ln(1 - p).
double chi2_threshold_2dof(double gate_probability);

/// CV-model prediction: mean <- F(dt) mean, P <- F P F' + Q(dt).
TrackState predict(const TrackState& track, double dt, double process_noise_intensity);

StateMatrix cv_transition(double dt);
StateMatrix cv_process_noise(double dt, double q);

/// Position-only linear observation update. UKF uses the unscented transform
/// (alpha = 1e-3, beta = 2, kappa = 0); on this linear model both reduce to
/// the closed-form Kalman update.
TrackState update_ekf(const TrackState& track, const Detection& detection,
                      const Eigen::Matrix2d& observation_noise);
TrackState update_ukf(const TrackState& track, const Detection& detection,
                      const Eigen::Matrix2d& observation_noise);

struct GateResult {
  bool accept = false;
  double mahalanobis2 = 0.0;
};

/// Validation region test: d2 = nu' S^-1 nu vs the chi-square bound.
GateResult gate(const TrackState& track, const Detection& detection,
                const Eigen::Matrix2d& observation_noise, double gate_probability = 0.95);

struct Match {
  int track = -1;
  int detection = -1;
};

/// Greedy minimal-first one-to-one matching on the given cost matrix;
/// infinite costs are non-edges. Rows = tracks, cols = detections.
std::vector<Match> associate_nn(const std::vector<std::vector<double>>& cost);

struct JpdaResult {
  // beta[i][j] = marginal probability that track i is associated with
  // detection j; beta_miss[i] completes each row to 1.
  std::vector<std::vector<double>> beta;
  std::vector<double> beta_miss;
  std::vector<Match> matches;
  bool fell_back_to_nn = false;
};

/// JPDA marginals by joint-event enumeration over each connected component
/// of the gating graph, then NN-style matching on (1 - beta) costs.
/// likelihood[i][j] must be the Gaussian evidence N(nu_ij; 0, S_ij) for
/// gated pairs and exactly 0 for non-gated pairs.
JpdaResult associate_nnjpda(const std::vector<std::vector<double>>& likelihood,
                            double detection_probability, double clutter_density,
                            int max_component = 10);

/// Multi-sensor tracker: predict / gate / associate / update / lifecycle.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config = {});

  const TrackerConfig& config() const { return config_; }

  /// Processes all detections sharing timestamp t; returns confirmed tracks.
  /// Detections may mix sources; association is computed jointly.
  std::vector<TrackState> step(std::vector<Detection> detections, double timestamp);

  std::vector<TrackState> confirmed_tracks() const;
  const std::vector<TrackState>& all_tracks() const { return tracks_; }

 private:
  Eigen::Matrix2d noise_for(const Detection& det) const;

  TrackerConfig config_;
  std::vector<TrackState> tracks_;
  int next_id_ = 1;
  double last_step_time_ = -std::numeric_limits<double>::infinity();
  bool started_ = false;
};

/// Track log row: timestamp,id,x,y,vx,vy,cov_xx,cov_xy,cov_yy,n_sources
void append_track_csv(std::string* out, double timestamp, const TrackState& track);
std::string track_csv_header();

}  // namespace scrubber

#endif
