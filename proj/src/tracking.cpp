#include "scrubber/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "scrubber/logging.hpp"

namespace scrubber {

namespace {

const Eigen::Matrix<double, 2, 4> kObservation = [] {
  Eigen::Matrix<double, 2, 4> h;
  h << 1, 0, 0, 0, 0, 1, 0, 0;
  return h;
}();

StateMatrix symmetrize(const StateMatrix& p) { return 0.5 * (p + p.transpose()); }

}  // namespace

double chi2_threshold_2dof(double gate_probability) {
  if (gate_probability <= 0.0 || gate_probability >= 1.0) {
    throw std::invalid_argument("gate probability must be in (0, 1)");
  }
  return -2.0 * std::log(1.0 - gate_probability);
}

StateMatrix cv_transition(double dt) {
  StateMatrix f = StateMatrix::Identity();
  f(0, 2) = dt;
  f(1, 3) = dt;
  return f;
}

StateMatrix cv_process_noise(double dt, double q) {
  const double dt2 = dt * dt, dt3 = dt2 * dt;
  StateMatrix m = StateMatrix::Zero();
  m(0, 0) = m(1, 1) = q * dt3 / 3.0;
  m(0, 2) = m(2, 0) = q * dt2 / 2.0;
  m(1, 3) = m(3, 1) = q * dt2 / 2.0;
  m(2, 2) = m(3, 3) = q * dt;
  return m;
}

TrackState predict(const TrackState& track, double dt, double q) {
  if (dt < 0.0) throw std::invalid_argument("predict: dt must be >= 0");
  TrackState out = track;
  const StateMatrix f = cv_transition(dt);
  out.mean = f * track.mean;
  out.covariance = symmetrize(f * track.covariance * f.transpose() + cv_process_noise(dt, q));
  return out;
}

TrackState update_ekf(const TrackState& track, const Detection& detection,
                      const Eigen::Matrix2d& r) {
  const Eigen::Vector2d nu = detection.position - kObservation * track.mean;
  const Eigen::Matrix2d s = kObservation * track.covariance * kObservation.transpose() + r;
  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("update: innovation covariance not positive definite");
  }
  const Eigen::Matrix<double, 4, 2> k =
      track.covariance * kObservation.transpose() * llt.solve(Eigen::Matrix2d::Identity());
  TrackState out = track;
  out.mean = track.mean + k * nu;
  out.covariance =
      symmetrize((StateMatrix::Identity() - k * kObservation) * track.covariance);
  return out;
}

TrackState update_ukf(const TrackState& track, const Detection& detection,
                      const Eigen::Matrix2d& r) {
  constexpr int n = 4;
  constexpr double alpha = 1e-3, beta = 2.0, kappa = 0.0;
  constexpr double lambda = alpha * alpha * (n + kappa) - n;

  Eigen::LLT<StateMatrix> chol((n + lambda) * track.covariance);
  if (chol.info() != Eigen::Success) {
    throw std::runtime_error("ukf: state covariance not positive definite");
  }
  const StateMatrix sqrt_p = chol.matrixL();

  std::array<StateVector, 2 * n + 1> sigma;
  sigma[0] = track.mean;
  for (int i = 0; i < n; ++i) {
    sigma[1 + i] = track.mean + sqrt_p.col(i);
    sigma[1 + n + i] = track.mean - sqrt_p.col(i);
  }
  const double w0_m = lambda / (n + lambda);
  const double w0_c = w0_m + (1.0 - alpha * alpha + beta);
  const double wi = 0.5 / (n + lambda);

  std::array<Eigen::Vector2d, 2 * n + 1> z;
  Eigen::Vector2d z_mean = Eigen::Vector2d::Zero();
  for (int i = 0; i < 2 * n + 1; ++i) {
    z[i] = kObservation * sigma[i];
    z_mean += (i == 0 ? w0_m : wi) * z[i];
  }
  Eigen::Matrix2d s = r;
  Eigen::Matrix<double, 4, 2> cross = Eigen::Matrix<double, 4, 2>::Zero();
  for (int i = 0; i < 2 * n + 1; ++i) {
    const double w = (i == 0 ? w0_c : wi);
    const Eigen::Vector2d dz = z[i] - z_mean;
    s += w * dz * dz.transpose();
    cross += w * (sigma[i] - track.mean) * dz.transpose();
  }
  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("update: innovation covariance not positive definite");
  }
  const Eigen::Matrix<double, 4, 2> k = cross * llt.solve(Eigen::Matrix2d::Identity());
  TrackState out = track;
  out.mean = track.mean + k * (detection.position - z_mean);
  out.covariance = symmetrize(track.covariance - k * s * k.transpose());
  return out;
}

GateResult gate(const TrackState& track, const Detection& detection, const Eigen::Matrix2d& r,
                double gate_probability) {
  const Eigen::Vector2d nu = detection.position - kObservation * track.mean;
  const Eigen::Matrix2d s = kObservation * track.covariance * kObservation.transpose() + r;
  Eigen::LLT<Eigen::Matrix2d> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("gate: singular innovation covariance");
  }
  GateResult res;
  res.mahalanobis2 = nu.dot(llt.solve(nu));
  res.accept = res.mahalanobis2 <= chi2_threshold_2dof(gate_probability);
  return res;
}

std::vector<Match> associate_nn(const std::vector<std::vector<double>>& cost) {
  struct Edge {
    double cost;
    int track, detection;
  };
  std::vector<Edge> edges;
  for (size_t i = 0; i < cost.size(); ++i) {
    for (size_t j = 0; j < cost[i].size(); ++j) {
      if (std::isfinite(cost[i][j])) {
        edges.push_back({cost[i][j], static_cast<int>(i), static_cast<int>(j)});
      }
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.track != b.track) return a.track < b.track;
    return a.detection < b.detection;
  });
  std::vector<char> track_used(cost.size(), 0);
  std::vector<char> det_used(cost.empty() ? 0 : 64, 0);
  size_t n_det = 0;
  for (const auto& row : cost) n_det = std::max(n_det, row.size());
  det_used.assign(n_det, 0);

  std::vector<Match> matches;
  for (const auto& e : edges) {
    if (track_used[e.track] || det_used[e.detection]) continue;
    track_used[e.track] = 1;
    det_used[e.detection] = 1;
    matches.push_back({e.track, e.detection});
  }
  return matches;
}

namespace {

// Recursive joint-event enumeration for one connected component.
// tracks/dets are component-local index lists into the likelihood matrix.
struct ComponentEnumerator {
  const std::vector<std::vector<double>>& likelihood;
  const std::vector<int>& tracks;
  const std::vector<int>& dets;
  double p_d, lambda;
  std::vector<char> det_used;
  std::vector<int> assignment;  // per component track: det slot or -1

  // accumulators
  double total = 0.0;
  std::vector<std::vector<double>> pair_mass;  // [component track][component det]
  std::vector<double> miss_mass;

  ComponentEnumerator(const std::vector<std::vector<double>>& lh, const std::vector<int>& tr,
                      const std::vector<int>& de, double pd, double lam)
      : likelihood(lh), tracks(tr), dets(de), p_d(pd), lambda(lam) {
    det_used.assign(dets.size(), 0);
    assignment.assign(tracks.size(), -1);
    pair_mass.assign(tracks.size(), std::vector<double>(dets.size(), 0.0));
    miss_mass.assign(tracks.size(), 0.0);
  }

  void recurse(size_t t, double weight) {
    if (t == tracks.size()) {
      // unassigned detections are clutter
      double w = weight;
      for (size_t j = 0; j < dets.size(); ++j) {
        if (!det_used[j]) w *= lambda;
      }
      total += w;
      for (size_t i = 0; i < tracks.size(); ++i) {
        if (assignment[i] >= 0) {
          pair_mass[i][assignment[i]] += w;
        } else {
          miss_mass[i] += w;
        }
      }
      return;
    }
    // miss
    assignment[t] = -1;
    recurse(t + 1, weight * (1.0 - p_d));
    // each gated detection
    for (size_t j = 0; j < dets.size(); ++j) {
      if (det_used[j]) continue;
      const double lh = likelihood[tracks[t]][dets[j]];
      if (lh <= 0.0) continue;
      det_used[j] = 1;
      assignment[t] = static_cast<int>(j);
      recurse(t + 1, weight * p_d * lh);
      det_used[j] = 0;
    }
    assignment[t] = -1;
  }
};

}  // namespace

JpdaResult associate_nnjpda(const std::vector<std::vector<double>>& likelihood,
                            double detection_probability, double clutter_density,
                            int max_component) {
  const size_t n_tracks = likelihood.size();
  size_t n_dets = 0;
  for (const auto& row : likelihood) n_dets = std::max(n_dets, row.size());

  JpdaResult result;
  result.beta.assign(n_tracks, std::vector<double>(n_dets, 0.0));
  result.beta_miss.assign(n_tracks, 1.0);

  // connected components over the bipartite gating graph
  std::vector<int> track_comp(n_tracks, -1), det_comp(n_dets, -1);
  int n_comp = 0;
  for (size_t seed = 0; seed < n_tracks; ++seed) {
    if (track_comp[seed] >= 0) continue;
    const int comp = n_comp++;
    std::vector<size_t> stack_t{seed};
    track_comp[seed] = comp;
    std::vector<size_t> stack_d;
    while (!stack_t.empty() || !stack_d.empty()) {
      if (!stack_t.empty()) {
        const size_t t = stack_t.back();
        stack_t.pop_back();
        for (size_t j = 0; j < likelihood[t].size(); ++j) {
          if (likelihood[t][j] > 0.0 && det_comp[j] < 0) {
            det_comp[j] = comp;
            stack_d.push_back(j);
          }
        }
      } else {
        const size_t j = stack_d.back();
        stack_d.pop_back();
        for (size_t t = 0; t < n_tracks; ++t) {
          if (j < likelihood[t].size() && likelihood[t][j] > 0.0 && track_comp[t] < 0) {
            track_comp[t] = comp;
            stack_t.push_back(t);
          }
        }
      }
    }
  }

  for (int comp = 0; comp < n_comp; ++comp) {
    std::vector<int> tr, de;
    for (size_t t = 0; t < n_tracks; ++t) {
      if (track_comp[t] == comp) tr.push_back(static_cast<int>(t));
    }
    for (size_t j = 0; j < n_dets; ++j) {
      if (det_comp[j] == comp) de.push_back(static_cast<int>(j));
    }
    if (tr.empty()) continue;

    if (static_cast<int>(tr.size()) > max_component ||
        static_cast<int>(de.size()) > max_component) {
      // component too large to enumerate; NN on raw likelihood costs
      log_warn("nnjpda: component %zux%zu exceeds cap %d, falling back to NN", tr.size(),
               de.size(), max_component);
      result.fell_back_to_nn = true;
      for (int t : tr) {
        result.beta_miss[t] = 0.0;
        for (int j : de) {
          if (likelihood[t][j] > 0.0) result.beta[t][j] = likelihood[t][j];
        }
      }
      continue;
    }

    ComponentEnumerator en(likelihood, tr, de, detection_probability, clutter_density);
    en.recurse(0, 1.0);
    if (en.total <= 0.0) continue;
    for (size_t i = 0; i < tr.size(); ++i) {
      result.beta_miss[tr[i]] = en.miss_mass[i] / en.total;
      for (size_t j = 0; j < de.size(); ++j) {
        result.beta[tr[i]][de[j]] = en.pair_mass[i][j] / en.total;
      }
    }
  }

  // NN-style resolution on 1 - beta (gated pairs only)
  std::vector<std::vector<double>> cost(n_tracks,
                                        std::vector<double>(n_dets, std::numeric_limits<double>::infinity()));
  for (size_t t = 0; t < n_tracks; ++t) {
    for (size_t j = 0; j < n_dets; ++j) {
      const bool gated = j < likelihood[t].size() && likelihood[t][j] > 0.0;
      if (gated && result.beta[t][j] > 0.0) cost[t][j] = 1.0 - result.beta[t][j];
    }
  }
  result.matches = associate_nn(cost);
  return result;
}

Tracker::Tracker(TrackerConfig config) : config_(std::move(config)) {
  if (config_.confirm_hits < 2) throw std::invalid_argument("confirm_hits must be >= 2");
}

Eigen::Matrix2d Tracker::noise_for(const Detection& det) const {
  if (config_.use_detection_covariance) return det.covariance;
  const auto it = config_.observation_sigma.find(det.source);
  const double sigma = it != config_.observation_sigma.end() ? it->second : 0.2;
  return Eigen::Matrix2d::Identity() * sigma * sigma;
}

std::vector<TrackState> Tracker::step(std::vector<Detection> detections, double timestamp) {
  if (started_ && timestamp < last_step_time_) {
    throw std::invalid_argument("tracker step: time regression");
  }

  // canonical detection order: association must not depend on caller order
  std::sort(detections.begin(), detections.end(), [](const Detection& a, const Detection& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.position.x() != b.position.x()) return a.position.x() < b.position.x();
    if (a.position.y() != b.position.y()) return a.position.y() < b.position.y();
    return a.confidence < b.confidence;
  });

  // predict every live track to the step time
  const double dt = started_ ? timestamp - last_step_time_ : 0.0;
  for (auto& tr : tracks_) {
    const TrackState pred = predict(tr, dt, config_.process_noise_intensity);
    tr.mean = pred.mean;
    tr.covariance = pred.covariance;
  }
  started_ = true;
  last_step_time_ = timestamp;

  const double gate_thresh = chi2_threshold_2dof(config_.gate_probability);
  const size_t n_tracks = tracks_.size();
  const size_t n_dets = detections.size();

  // gate matrix: d2 against each track (tentative tracks use a widened gate,
  // 2x the gate distance, to cluster initiation hits)
  std::vector<std::vector<double>> d2(n_tracks, std::vector<double>(n_dets, -1.0));
  std::vector<std::vector<char>> gated(n_tracks, std::vector<char>(n_dets, 0));
  for (size_t t = 0; t < n_tracks; ++t) {
    const double limit =
        tracks_[t].status == TrackStatus::confirmed ? gate_thresh : 4.0 * gate_thresh;
    for (size_t j = 0; j < n_dets; ++j) {
      const GateResult g =
          gate(tracks_[t], detections[j], noise_for(detections[j]), config_.gate_probability);
      d2[t][j] = g.mahalanobis2;
      gated[t][j] = g.mahalanobis2 <= limit ? 1 : 0;
    }
  }

  std::vector<Match> matches;
  if (config_.association == AssociationMode::nearest_neighbor || n_tracks == 0) {
    std::vector<std::vector<double>> cost(
        n_tracks, std::vector<double>(n_dets, std::numeric_limits<double>::infinity()));
    for (size_t t = 0; t < n_tracks; ++t) {
      for (size_t j = 0; j < n_dets; ++j) {
        if (gated[t][j]) cost[t][j] = d2[t][j];
      }
    }
    matches = associate_nn(cost);
  } else {
    std::vector<std::vector<double>> likelihood(n_tracks, std::vector<double>(n_dets, 0.0));
    for (size_t t = 0; t < n_tracks; ++t) {
      for (size_t j = 0; j < n_dets; ++j) {
        if (!gated[t][j]) continue;
        const Eigen::Matrix2d s =
            tracks_[t].covariance.topLeftCorner<2, 2>() + noise_for(detections[j]);
        const double det_s = s.determinant();
        likelihood[t][j] =
            std::exp(-0.5 * d2[t][j]) / (2.0 * M_PI * std::sqrt(std::max(det_s, 1e-300)));
      }
    }
    matches = associate_nnjpda(likelihood, config_.detection_probability,
                               config_.clutter_density, config_.jpda_max_component)
                  .matches;
  }

  std::vector<char> det_matched(n_dets, 0);
  for (const auto& m : matches) {
    det_matched[m.detection] = 1;
    TrackState& tr = tracks_[m.track];
    const Detection& det = detections[m.detection];
    const Eigen::Matrix2d r = noise_for(det);
    if (tr.status == TrackStatus::tentative && tr.hit_times.size() == 1 &&
        timestamp - tr.hit_times.front() > 1e-6) {
      // two-point differencing on the second hit: velocity from displacement,
      // covariance per Bar-Shalom two-point initiation
      const double span = timestamp - tr.hit_times.front();
      const Eigen::Vector2d vel = (det.position - tr.mean.head<2>()) / span;
      tr.mean << det.position.x(), det.position.y(), vel.x(), vel.y();
      tr.covariance.setZero();
      tr.covariance.topLeftCorner<2, 2>() = r;
      tr.covariance.topRightCorner<2, 2>() = r / span;
      tr.covariance.bottomLeftCorner<2, 2>() = r / span;
      tr.covariance.bottomRightCorner<2, 2>() = 2.0 * r / (span * span);
    } else {
      const TrackState updated =
          config_.filter == FilterKind::ukf ? update_ukf(tr, det, r) : update_ekf(tr, det, r);
      tr.mean = updated.mean;
      tr.covariance = updated.covariance;
    }
    tr.last_update = timestamp;
    tr.sources.insert(det.source);
    tr.hit_times.push_back(timestamp);
    while (!tr.hit_times.empty() && tr.hit_times.front() < timestamp - config_.confirm_window) {
      tr.hit_times.erase(tr.hit_times.begin());
    }
    if (tr.status == TrackStatus::tentative &&
        static_cast<int>(tr.hit_times.size()) >= config_.confirm_hits) {
      tr.status = TrackStatus::confirmed;
    }
    if (tr.status == TrackStatus::confirmed) {
      tr.history.push_back({timestamp, tr.position()});
    }
  }

  // unmatched detections seed new tentative tracks unless they sit inside
  // the (widened) gate of any live track or of a track spawned earlier in
  // this step; several sensors firing on one person must not make duplicates
  const size_t pre_step_tracks = n_tracks;
  for (size_t j = 0; j < n_dets; ++j) {
    if (det_matched[j]) continue;
    bool near_existing = false;
    for (size_t t = 0; t < pre_step_tracks && !near_existing; ++t) {
      if (d2[t][j] <= 4.0 * gate_thresh) near_existing = true;
    }
    for (size_t t = pre_step_tracks; t < tracks_.size() && !near_existing; ++t) {
      const GateResult g =
          gate(tracks_[t], detections[j], noise_for(detections[j]), config_.gate_probability);
      if (g.mahalanobis2 <= 4.0 * gate_thresh) near_existing = true;
    }
    if (near_existing) continue;
    TrackState tr;
    tr.id = next_id_++;
    tr.status = TrackStatus::tentative;
    tr.mean.head<2>() = detections[j].position;
    tr.mean.tail<2>().setZero();
    tr.covariance.setZero();
    tr.covariance.topLeftCorner<2, 2>() = noise_for(detections[j]);
    tr.covariance(2, 2) = tr.covariance(3, 3) =
        config_.initial_velocity_sigma * config_.initial_velocity_sigma;
    tr.last_update = timestamp;
    tr.hit_times = {timestamp};
    tr.sources.insert(detections[j].source);
    tracks_.push_back(std::move(tr));
  }

  // deletion: stale tracks, plus tentatives that can no longer confirm
  std::vector<TrackState> kept;
  kept.reserve(tracks_.size());
  for (auto& tr : tracks_) {
    const double stale = timestamp - tr.last_update;
    if (stale > config_.deletion_timeout) continue;
    if (tr.status == TrackStatus::tentative && stale > config_.confirm_window) continue;
    kept.push_back(std::move(tr));
  }
  tracks_ = std::move(kept);

  return confirmed_tracks();
}

std::vector<TrackState> Tracker::confirmed_tracks() const {
  std::vector<TrackState> out;
  for (const auto& tr : tracks_) {
    if (tr.status == TrackStatus::confirmed) out.push_back(tr);
  }
  return out;
}

std::string track_csv_header() {
  return "timestamp,id,x,y,vx,vy,cov_xx,cov_xy,cov_yy,n_sources";
}

void append_track_csv(std::string* out, double timestamp, const TrackState& track) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.6f,%d,%.6f,%.6f,%.6f,%.6f,%.9f,%.9f,%.9f,%zu\n", timestamp,
                track.id, track.mean[0], track.mean[1], track.mean[2], track.mean[3],
                track.covariance(0, 0), track.covariance(0, 1), track.covariance(1, 1),
                track.sources.size());
  *out += buf;
}

}  // namespace scrubber
