#include "scrubber/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

using json = nlohmann::json;

namespace scrubber {

namespace {

template <typename T>
void get_if(const json& j, const char* key, T* out) {
  if (j.contains(key)) *out = j.at(key).get<T>();
}

json ring_schedule_to_json(const std::vector<RingStep>& schedule) {
  json arr = json::array();
  for (const auto& step : schedule) {
    json radius;
    if (std::isfinite(step.outer_radius)) {
      radius = step.outer_radius;
    } else {
      radius = "inf";
    }
    arr.push_back({{"outer_radius", radius}, {"tolerance", step.tolerance}});
  }
  return arr;
}

std::vector<RingStep> ring_schedule_from_json(const json& arr) {
  std::vector<RingStep> out;
  for (const auto& sj : arr) {
    RingStep step;
    const auto& radius = sj.at("outer_radius");
    step.outer_radius = radius.is_string() ? std::numeric_limits<double>::infinity()
                                           : radius.get<double>();
    step.tolerance = sj.at("tolerance").get<double>();
    out.push_back(step);
  }
  if (out.empty()) throw std::runtime_error("ring schedule must not be empty");
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(const std::string& text) {
  PipelineConfig cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }

  if (j.contains("clustering")) {
    const auto& c = j["clustering"];
    get_if(c, "voxel_leaf", &cfg.clustering.voxel_leaf);
    get_if(c, "plane_inlier_threshold", &cfg.clustering.plane_inlier_threshold);
    get_if(c, "plane_min_inlier_fraction", &cfg.clustering.plane_min_inlier_fraction);
    get_if(c, "ransac_iterations", &cfg.clustering.ransac_iterations);
    get_if(c, "ransac_seed", &cfg.clustering.ransac_seed);
    get_if(c, "euclidean_tolerance", &cfg.clustering.euclidean_tolerance);
    get_if(c, "min_cluster_size", &cfg.clustering.min_cluster_size);
    get_if(c, "max_cluster_size", &cfg.clustering.max_cluster_size);
    if (c.contains("ring_schedule")) {
      cfg.clustering.ring_schedule = ring_schedule_from_json(c["ring_schedule"]);
    }
  }
  if (j.contains("svm")) {
    const auto& c = j["svm"];
    get_if(c, "model", &cfg.svm_model_path);
    get_if(c, "probability_threshold", &cfg.human.probability_threshold);
    get_if(c, "position_sigma", &cfg.human.position_sigma);
  }
  if (j.contains("legs")) {
    const auto& c = j["legs"];
    get_if(c, "model", &cfg.legs_model_path);
    get_if(c, "voxel_leaf", &cfg.rgbd_legs.voxel_leaf);
    get_if(c, "band_height", &cfg.rgbd_legs.band_height);
    get_if(c, "max_base_height", &cfg.rgbd_legs.max_base_height);
    get_if(c, "upright_ratio", &cfg.rgbd_legs.upright_ratio);
    get_if(c, "pair_volume_min", &cfg.rgbd_legs.pair_volume_min);
    get_if(c, "pair_volume_max", &cfg.rgbd_legs.pair_volume_max);
    get_if(c, "similarity_threshold", &cfg.rgbd_legs.similarity_threshold);
    get_if(c, "max_pair_distance", &cfg.rgbd_legs.max_pair_distance);
    get_if(c, "cluster_tolerance", &cfg.rgbd_legs.cluster_tolerance);
    get_if(c, "min_cluster_size", &cfg.rgbd_legs.min_cluster_size);
    get_if(c, "rgbd_position_sigma", &cfg.rgbd_legs.position_sigma);
    get_if(c, "jump_threshold", &cfg.laser_legs.jump_threshold);
    get_if(c, "pairing_max", &cfg.laser_legs.pairing_max);
    get_if(c, "pair_confidence", &cfg.laser_legs.pair_confidence);
    get_if(c, "laser_position_sigma", &cfg.laser_legs.position_sigma);
  }
  if (j.contains("tracker")) {
    const auto& c = j["tracker"];
    get_if(c, "process_noise_intensity", &cfg.tracker.process_noise_intensity);
    get_if(c, "gate_probability", &cfg.tracker.gate_probability);
    get_if(c, "confirm_hits", &cfg.tracker.confirm_hits);
    get_if(c, "confirm_window", &cfg.tracker.confirm_window);
    get_if(c, "deletion_timeout", &cfg.tracker.deletion_timeout);
    get_if(c, "clutter_density", &cfg.tracker.clutter_density);
    get_if(c, "detection_probability", &cfg.tracker.detection_probability);
    get_if(c, "initial_velocity_sigma", &cfg.tracker.initial_velocity_sigma);
    if (c.contains("association")) {
      const std::string mode = c["association"].get<std::string>();
      if (mode == "nn") cfg.tracker.association = AssociationMode::nearest_neighbor;
      else if (mode == "nnjpda") cfg.tracker.association = AssociationMode::nnjpda;
      else throw std::runtime_error("tracker.association must be nn or nnjpda");
    }
    if (c.contains("filter")) {
      const std::string f = c["filter"].get<std::string>();
      if (f == "ekf") cfg.tracker.filter = FilterKind::ekf;
      else if (f == "ukf") cfg.tracker.filter = FilterKind::ukf;
      else throw std::runtime_error("tracker.filter must be ekf or ukf (SIR not implemented)");
    }
    if (c.contains("observation_sigma")) {
      for (auto& [name, val] : c["observation_sigma"].items()) {
        cfg.tracker.observation_sigma[detection_source_from_string(name)] = val.get<double>();
      }
    }
  }
  if (j.contains("object")) {
    const auto& c = j["object"];
    get_if(c, "sigma0", &cfg.object_fit.noise.sigma0);
    get_if(c, "sigma1", &cfg.object_fit.noise.sigma1);
    get_if(c, "z0", &cfg.object_fit.noise.z0);
    get_if(c, "k", &cfg.object_fit.noise.k);
    get_if(c, "min_inlier_fraction", &cfg.object_fit.min_inlier_fraction);
    get_if(c, "max_sag", &cfg.object_fit.max_sag);
    get_if(c, "fit_curvature", &cfg.object_fit.fit_curvature);
    get_if(c, "ransac_seed", &cfg.object_fit.ransac_seed);
    get_if(c, "min_component_pixels", &cfg.object_detect.min_component_pixels);
    cfg.object_detect.noise = cfg.object_fit.noise;
  }
  if (j.contains("dirt")) {
    const auto& c = j["dirt"];
    get_if(c, "block_size", &cfg.dirt.block_size);
    get_if(c, "gmm_components", &cfg.dirt.gmm_components);
    get_if(c, "seed", &cfg.dirt.seed);
    get_if(c, "median_window", &cfg.dirt.median_window);
    get_if(c, "cell_size", &cfg.dirt.cell_size);
    get_if(c, "percentile", &cfg.dirt.threshold.percentile);
    if (c.contains("absolute_threshold")) {
      cfg.dirt.threshold.percentile_mode = false;
      cfg.dirt.threshold.absolute = c["absolute_threshold"].get<double>();
    }
    if (cfg.dirt.gmm_components < 1 || cfg.dirt.gmm_components > 8) {
      throw std::runtime_error("dirt.gmm_components must be in [1, 8]");
    }
  }
  if (j.contains("analytics")) {
    const auto& c = j["analytics"];
    get_if(c, "heatmap_cell", &cfg.analytics.heatmap_cell);
    get_if(c, "iou_threshold", &cfg.analytics.iou_threshold);
  }
  if (j.contains("detectors")) {
    cfg.enabled_detectors.clear();
    for (const auto& d : j["detectors"]) {
      cfg.enabled_detectors.insert(detection_source_from_string(d.get<std::string>()));
    }
  }
  cfg.human.clustering = cfg.clustering;
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string PipelineConfig::dump() const {
  json j;
  j["clustering"] = {{"voxel_leaf", clustering.voxel_leaf},
                     {"plane_inlier_threshold", clustering.plane_inlier_threshold},
                     {"plane_min_inlier_fraction", clustering.plane_min_inlier_fraction},
                     {"ransac_iterations", clustering.ransac_iterations},
                     {"ransac_seed", clustering.ransac_seed},
                     {"euclidean_tolerance", clustering.euclidean_tolerance},
                     {"min_cluster_size", clustering.min_cluster_size},
                     {"max_cluster_size", clustering.max_cluster_size},
                     {"ring_schedule", ring_schedule_to_json(clustering.ring_schedule)}};
  j["svm"] = {{"model", svm_model_path},
              {"probability_threshold", human.probability_threshold},
              {"position_sigma", human.position_sigma}};
  j["legs"] = {{"model", legs_model_path},
               {"voxel_leaf", rgbd_legs.voxel_leaf},
               {"band_height", rgbd_legs.band_height},
               {"max_base_height", rgbd_legs.max_base_height},
               {"upright_ratio", rgbd_legs.upright_ratio},
               {"pair_volume_min", rgbd_legs.pair_volume_min},
               {"pair_volume_max", rgbd_legs.pair_volume_max},
               {"similarity_threshold", rgbd_legs.similarity_threshold},
               {"max_pair_distance", rgbd_legs.max_pair_distance},
               {"cluster_tolerance", rgbd_legs.cluster_tolerance},
               {"min_cluster_size", rgbd_legs.min_cluster_size},
               {"rgbd_position_sigma", rgbd_legs.position_sigma},
               {"jump_threshold", laser_legs.jump_threshold},
               {"pairing_max", laser_legs.pairing_max},
               {"pair_confidence", laser_legs.pair_confidence},
               {"laser_position_sigma", laser_legs.position_sigma}};
  json sigma = json::object();
  for (const auto& [src, val] : tracker.observation_sigma) sigma[to_string(src)] = val;
  j["tracker"] = {
      {"process_noise_intensity", tracker.process_noise_intensity},
      {"gate_probability", tracker.gate_probability},
      {"confirm_hits", tracker.confirm_hits},
      {"confirm_window", tracker.confirm_window},
      {"deletion_timeout", tracker.deletion_timeout},
      {"clutter_density", tracker.clutter_density},
      {"detection_probability", tracker.detection_probability},
      {"initial_velocity_sigma", tracker.initial_velocity_sigma},
      {"association",
       tracker.association == AssociationMode::nearest_neighbor ? "nn" : "nnjpda"},
      {"filter", tracker.filter == FilterKind::ekf ? "ekf" : "ukf"},
      {"observation_sigma", sigma}};
  j["object"] = {{"sigma0", object_fit.noise.sigma0},
                 {"sigma1", object_fit.noise.sigma1},
                 {"z0", object_fit.noise.z0},
                 {"k", object_fit.noise.k},
                 {"min_inlier_fraction", object_fit.min_inlier_fraction},
                 {"max_sag", object_fit.max_sag},
                 {"fit_curvature", object_fit.fit_curvature},
                 {"ransac_seed", object_fit.ransac_seed},
                 {"min_component_pixels", object_detect.min_component_pixels}};
  j["dirt"] = {{"block_size", dirt.block_size},
               {"gmm_components", dirt.gmm_components},
               {"seed", dirt.seed},
               {"median_window", dirt.median_window},
               {"cell_size", dirt.cell_size}};
  if (dirt.threshold.percentile_mode) {
    j["dirt"]["percentile"] = dirt.threshold.percentile;
  } else {
    j["dirt"]["absolute_threshold"] = dirt.threshold.absolute;
  }
  j["analytics"] = {{"heatmap_cell", analytics.heatmap_cell},
                    {"iou_threshold", analytics.iou_threshold}};
  json dets = json::array();
  for (const auto& d : enabled_detectors) dets.push_back(to_string(d));
  j["detectors"] = dets;
  return j.dump(2) + "\n";
}

void PipelineConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << dump();
}

}  // namespace scrubber
