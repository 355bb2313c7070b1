// scrubber: frame-replay perception pipeline for the floor-scrubber robot.
// Subcommands: synth, train-svm, train-legs2d, detect, track, dirt, objects,
// evaluate, heatmap. All artifacts are deterministic given --seed.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "scrubber/analytics.hpp"
#include "scrubber/config.hpp"
#include "scrubber/dirt.hpp"
#include "scrubber/floor_objects.hpp"
#include "scrubber/legs_laser.hpp"
#include "scrubber/legs_rgbd.hpp"
#include "scrubber/logging.hpp"
#include "scrubber/png_io.hpp"
#include "scrubber/sequence.hpp"
#include "scrubber/svm.hpp"
#include "scrubber/synthetic.hpp"
#include "scrubber/tracking.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace scrubber;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string input;
  std::string out;
  uint64_t seed = 1;
  std::vector<std::string> detectors;
};

PipelineConfig load_config(const CommonOpts& opts) {
  PipelineConfig cfg = opts.config_path.empty() ? PipelineConfig{}
                                                : PipelineConfig::load(opts.config_path);
  if (!opts.detectors.empty()) {
    cfg.enabled_detectors.clear();
    for (const auto& d : opts.detectors) {
      cfg.enabled_detectors.insert(detection_source_from_string(d));
    }
  }
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

json detection_to_json(const Detection& d) {
  return {{"x", d.position.x()},
          {"y", d.position.y()},
          {"source", to_string(d.source)},
          {"confidence", d.confidence},
          {"timestamp", d.timestamp},
          {"cov", {d.covariance(0, 0), d.covariance(0, 1), d.covariance(1, 1)}}};
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.position = {j.at("x").get<double>(), j.at("y").get<double>()};
  d.source = detection_source_from_string(j.at("source").get<std::string>());
  d.confidence = j.at("confidence").get<double>();
  d.timestamp = j.at("timestamp").get<double>();
  const auto& cov = j.at("cov");
  d.covariance << cov[0].get<double>(), cov[1].get<double>(), cov[1].get<double>(),
      cov[2].get<double>();
  return d;
}

// --- synth -------------------------------------------------------------------

SceneSpec make_scene(int walkers, int dirt_spots, int boxes, double duration, double rate,
                     double robot_speed, bool forward_camera) {
  SceneSpec spec;
  spec.duration = duration;
  spec.rate = rate;
  spec.robot_speed = robot_speed;
  spec.emit_forward_camera = forward_camera;

  // lanes keep walkers clear of the robot at the origin
  const double lanes[] = {1.0, 0.4, -0.8, 1.6, -1.6, 2.2};
  for (int i = 0; i < walkers; ++i) {
    WalkerSpec w;
    const double lane = lanes[i % 6] + 0.2 * (i / 6);
    const double travel = 1.2 * duration / 2.0;
    const double reach = std::min(5.0, travel);
    switch (i % 3) {
      case 0:
        w.x0 = -reach;
        w.y0 = lane;
        w.vx = 1.2;
        w.vy = 0.0;
        break;
      case 1:
        w.x0 = reach;
        w.y0 = lane + 0.3;
        w.vx = -1.2;
        w.vy = 0.0;
        break;
      default:
        w.x0 = lane + 0.3;
        w.y0 = -reach;
        w.vx = 0.0;
        w.vy = 1.2;
        break;
    }
    w.intensity_mean = 140.0 + 15.0 * (i % 4);
    w.color = {static_cast<uint8_t>(60 + 50 * (i % 4)), 80, static_cast<uint8_t>(180 - 30 * (i % 4))};
    spec.walkers.push_back(w);
  }
  for (int i = 0; i < dirt_spots; ++i) {
    DirtSpotSpec d;
    d.x = 0.75 + 0.45 * i;
    d.y = (i % 2 == 0 ? 0.08 : -0.1);
    d.radius = 0.09 + 0.015 * (i % 3);
    spec.dirt_spots.push_back(d);
  }
  for (int i = 0; i < boxes; ++i) {
    BoxSpec b;
    if (i == 0) {
      // small box inside the floor-camera corridor
      b.x = 1.1;
      b.y = -0.05;
      b.w = 0.12;
      b.d = 0.12;
      b.h = 0.04;
    } else {
      b.x = 2.0 + 0.8 * i;
      b.y = (i % 2 == 0 ? 2.5 : -2.5);
      b.w = 0.5;
      b.d = 0.4;
      b.h = 0.5;
    }
    spec.boxes.push_back(b);
  }
  return spec;
}

int cmd_synth(const CommonOpts& opts, int walkers, int dirt_spots, int boxes, double duration,
              double rate, double robot_speed, bool forward_camera,
              const std::string& clusters_out, int train_count, const std::string& legs_out) {
  if (opts.out.empty()) throw std::runtime_error("synth needs --out");
  const SceneSpec spec =
      make_scene(walkers, dirt_spots, boxes, duration, rate, robot_speed, forward_camera);
  const SyntheticScene scene = generate_synthetic_scene(spec, opts.seed);
  save_scene(scene, opts.out);
  std::printf("synth: %zu frames, %d walkers -> %s\n", scene.sequence.frames.size(), walkers,
              opts.out.c_str());

  if (!clusters_out.empty()) {
    fs::create_directories(clusters_out + "/pos");
    fs::create_directories(clusters_out + "/neg");
    const auto clusters = generate_training_clusters(train_count, opts.seed + 101);
    int pos = 0, neg = 0;
    char name[64];
    for (const auto& lc : clusters) {
      if (lc.label > 0) {
        std::snprintf(name, sizeof(name), "%s/pos/%06d.bin", clusters_out.c_str(), pos++);
      } else {
        std::snprintf(name, sizeof(name), "%s/neg/%06d.bin", clusters_out.c_str(), neg++);
      }
      write_cloud_bin(name, lc.cloud);
    }
    std::printf("synth: %d/%d training clusters -> %s\n", pos, neg, clusters_out.c_str());
  }
  if (!legs_out.empty()) {
    fs::create_directories(legs_out + "/pos");
    fs::create_directories(legs_out + "/neg");
    const auto scans = generate_training_scans(train_count, opts.seed + 202);
    int pos = 0, neg = 0;
    char name[64];
    for (const auto& ls : scans) {
      if (ls.label > 0) {
        std::snprintf(name, sizeof(name), "%s/pos/%06d.csv", legs_out.c_str(), pos++);
      } else {
        std::snprintf(name, sizeof(name), "%s/neg/%06d.csv", legs_out.c_str(), neg++);
      }
      write_scan_csv(name, ls.scan);
    }
    std::printf("synth: %d/%d training scans -> %s\n", pos, neg, legs_out.c_str());
  }
  return 0;
}

// --- training ----------------------------------------------------------------

std::vector<std::string> sorted_files(const std::string& dir, const std::string& ext) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ext) files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<double> parse_grid_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw std::runtime_error("empty grid list");
  return out;
}

int cmd_train_svm(const CommonOpts& opts, const std::string& pos_dir, const std::string& neg_dir,
                  int folds, const std::string& grid_c, const std::string& grid_gamma,
                  const std::string& model_out) {
  const PipelineConfig cfg = load_config(opts);
  std::vector<SvmExample> examples;
  auto ingest = [&](const std::string& dir, int label) {
    for (const auto& path : sorted_files(dir, ".bin")) {
      PointCloud3D cloud = read_cloud_bin(path);
      if (cloud.empty()) continue;
      cloud = voxel_downsample(cloud, cfg.clustering.voxel_leaf);
      Cluster c;
      c.indices.resize(cloud.size());
      for (size_t i = 0; i < cloud.size(); ++i) c.indices[i] = static_cast<int>(i);
      c.bbox = bounding_box(cloud.points);
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      for (const auto& p : cloud.points) sum += p.position();
      c.centroid = sum / static_cast<double>(cloud.size());
      const FeatureVector f = extract_features(c, cloud);
      examples.push_back({std::vector<double>(f.begin(), f.end()), label});
    }
  };
  ingest(pos_dir, +1);
  ingest(neg_dir, -1);

  SvmGrid grid;
  if (!grid_c.empty()) grid.cost_candidates = parse_grid_values(grid_c);
  if (!grid_gamma.empty()) grid.gamma_candidates = parse_grid_values(grid_gamma);

  SvmTrainReport report;
  const SvmModel model = svm_train(examples, grid, folds, &report);
  save_svm_model(model, model_out);
  std::printf("train-svm: %zu examples, best C=%g gamma=%g cv=%.4f, %zu SVs -> %s\n",
              examples.size(), report.best_cost, report.best_gamma, report.best_cv_accuracy,
              model.support_vectors.size(), model_out.c_str());
  return 0;
}

int cmd_train_legs2d(const CommonOpts& opts, const std::string& pos_dir,
                     const std::string& neg_dir, int rounds, const std::string& model_out) {
  const PipelineConfig cfg = load_config(opts);
  std::vector<AdaBoostExample> examples;
  auto ingest = [&](const std::string& dir, int label) {
    for (const auto& path : sorted_files(dir, ".csv")) {
      const LaserScan2D scan = read_scan_csv(path);
      for (const auto& seg : segment_scan(scan, cfg.laser_legs.jump_threshold)) {
        examples.push_back(
            {std::vector<double>(seg.features.begin(), seg.features.end()), label});
      }
    }
  };
  ingest(pos_dir, +1);
  ingest(neg_dir, -1);
  const AdaBoostModel model = adaboost_train(examples, rounds);
  save_adaboost_model(model, model_out);
  std::printf("train-legs2d: %zu segments, %zu stumps -> %s\n", examples.size(),
              model.stumps.size(), model_out.c_str());
  return 0;
}

// --- detection / tracking ------------------------------------------------------

struct DetectorBundle {
  PipelineConfig cfg;
  std::optional<SvmModel> svm;
  std::optional<AdaBoostModel> legs;
};

DetectorBundle load_detectors(const CommonOpts& opts) {
  DetectorBundle bundle{load_config(opts), std::nullopt, std::nullopt};
  if (bundle.cfg.enabled_detectors.count(DetectionSource::lidar3d)) {
    if (bundle.cfg.svm_model_path.empty()) {
      throw std::runtime_error("lidar3d detector enabled but svm.model not set in config");
    }
    bundle.svm = load_svm_model(bundle.cfg.svm_model_path);
  }
  if (bundle.cfg.enabled_detectors.count(DetectionSource::laser_legs)) {
    if (bundle.cfg.legs_model_path.empty()) {
      throw std::runtime_error("laser_legs detector enabled but legs.model not set in config");
    }
    bundle.legs = load_adaboost_model(bundle.cfg.legs_model_path);
  }
  return bundle;
}

struct FrameDetections {
  double timestamp = 0.0;
  std::vector<Detection> detections;
};

struct DetectOutputs {
  std::vector<FrameDetections> frames;
  json candidate_boxes = json::array();  // per lidar frame, with probabilities
  int negatives = 0;                     // candidates below the probability threshold
};

DetectOutputs run_detectors(SequenceReader& reader, const DetectorBundle& bundle) {
  DetectOutputs out;
  const auto& cfg = bundle.cfg;
  const auto& manifest = reader.manifest();
  int lidar_frame = 0;
  while (auto frame = reader.next()) {
    const Pose2D pose = reader.pose_at(frame->timestamp);
    const Eigen::Isometry3d world_T_base = pose.isometry();
    FrameDetections fd;
    fd.timestamp = frame->timestamp;

    if (frame->sensor == SensorId::lidar3d && frame->cloud && bundle.svm) {
      Eigen::Isometry3d world_T_sensor = world_T_base;
      const auto it = manifest.sensors.find(SensorId::lidar3d);
      if (it != manifest.sensors.end()) {
        world_T_sensor = world_T_base * Eigen::Isometry3d(it->second.extrinsics);
      }
      fd.detections =
          detect_humans_3d(*frame->cloud, cfg.human, *bundle.svm, world_T_sensor);
      const auto scored = score_human_candidates(*frame->cloud, cfg.human, *bundle.svm);
      json boxes = json::array();
      for (const auto& sb : scored) {
        if (sb.probability < cfg.human.probability_threshold) out.negatives += 1;
        const Eigen::Vector3d wc = world_T_sensor * sb.box.center;
        boxes.push_back({{"center", {wc.x(), wc.y(), wc.z()}},
                         {"extents", {sb.box.extents.x(), sb.box.extents.y(), sb.box.extents.z()}},
                         {"probability", sb.probability}});
      }
      out.candidate_boxes.push_back(
          {{"frame", lidar_frame}, {"timestamp", frame->timestamp}, {"boxes", boxes}});
      ++lidar_frame;
    } else if (frame->sensor == SensorId::laser2d && frame->scan && bundle.legs &&
               cfg.enabled_detectors.count(DetectionSource::laser_legs)) {
      Eigen::Isometry3d world_T_laser = world_T_base;
      const auto it = manifest.sensors.find(SensorId::laser2d);
      if (it != manifest.sensors.end()) {
        world_T_laser = world_T_base * Eigen::Isometry3d(it->second.extrinsics);
      }
      fd.detections = detect_legs_2d(*frame->scan, *bundle.legs, cfg.laser_legs, world_T_laser);
    } else if (frame->sensor == SensorId::rgbd_forward && frame->depth && frame->rgb &&
               cfg.enabled_detectors.count(DetectionSource::rgbd_legs)) {
      const auto it = manifest.sensors.find(SensorId::rgbd_forward);
      const Eigen::Matrix4d base_T_cam =
          it != manifest.sensors.end() ? it->second.extrinsics : Eigen::Matrix4d::Identity();
      const ColoredCloud cloud = make_registered_cloud(*frame->depth, *frame->rgb, base_T_cam);
      fd.detections = detect_legs_rgbd(cloud, cfg.rgbd_legs, world_T_base);
    }

    if (!fd.detections.empty() || frame->sensor == SensorId::lidar3d) {
      out.frames.push_back(std::move(fd));
    }
  }
  return out;
}

int cmd_detect(const CommonOpts& opts) {
  if (opts.input.empty() || opts.out.empty()) throw std::runtime_error("detect needs --input/--out");
  fs::create_directories(opts.out);
  DetectorBundle bundle = load_detectors(opts);
  SequenceReader reader(opts.input);
  const DetectOutputs outputs = run_detectors(reader, bundle);

  json frames = json::array();
  size_t total = 0;
  for (const auto& fd : outputs.frames) {
    json dets = json::array();
    for (const auto& d : fd.detections) dets.push_back(detection_to_json(d));
    total += fd.detections.size();
    frames.push_back({{"timestamp", fd.timestamp}, {"detections", dets}});
  }
  write_text(opts.out + "/detections.json", json(frames).dump(2) + "\n");
  json boxes;
  boxes["frames"] = outputs.candidate_boxes;
  boxes["negative_candidates"] = outputs.negatives;
  boxes["probability_threshold"] = bundle.cfg.human.probability_threshold;
  write_text(opts.out + "/boxes.json", boxes.dump(2) + "\n");
  bundle.cfg.save(opts.out + "/config.json");
  std::printf("detect: %zu detections over %zu frames -> %s\n", total, outputs.frames.size(),
              opts.out.c_str());
  return 0;
}

int cmd_track(const CommonOpts& opts, const std::string& detections_path) {
  if (opts.input.empty() || opts.out.empty()) throw std::runtime_error("track needs --input/--out");
  fs::create_directories(opts.out);

  std::map<double, std::vector<Detection>> by_time;
  PipelineConfig cfg;
  if (!detections_path.empty()) {
    cfg = load_config(opts);
    std::ifstream in(detections_path);
    if (!in) throw std::runtime_error("cannot open " + detections_path);
    json j;
    in >> j;
    for (const auto& fj : j) {
      for (const auto& dj : fj.at("detections")) {
        const Detection d = detection_from_json(dj);
        by_time[d.timestamp].push_back(d);
      }
    }
  } else {
    DetectorBundle bundle = load_detectors(opts);
    cfg = bundle.cfg;
    SequenceReader reader(opts.input);
    const DetectOutputs outputs = run_detectors(reader, bundle);
    for (const auto& fd : outputs.frames) {
      for (const auto& d : fd.detections) by_time[d.timestamp].push_back(d);
    }
  }

  Tracker tracker(cfg.tracker);
  std::string csv = track_csv_header() + "\n";
  for (const auto& [t, dets] : by_time) {
    const auto confirmed = tracker.step(dets, t);
    for (const auto& tr : confirmed) append_track_csv(&csv, t, tr);
  }
  write_text(opts.out + "/tracks.csv", csv);
  cfg.save(opts.out + "/config.json");
  std::printf("track: wrote %s/tracks.csv\n", opts.out.c_str());
  return 0;
}

// --- dirt / objects ------------------------------------------------------------

std::optional<std::vector<uint8_t>> load_mask_png(const std::string& dir, int frame, int width,
                                                  int height) {
  if (dir.empty()) return std::nullopt;
  char name[64];
  std::snprintf(name, sizeof(name), "%s/%06d.png", dir.c_str(), frame);
  if (!fs::exists(name)) return std::nullopt;
  int w = 0, h = 0;
  std::vector<uint8_t> mask;
  png::read_gray8(name, &w, &h, &mask);
  if (w != width || h != height) {
    throw std::runtime_error(std::string("mask dimensions differ from frame: ") + name);
  }
  return mask;
}

int cmd_dirt(const CommonOpts& opts, const std::string& floor_masks_dir,
             const std::string& laser_masks_dir) {
  if (opts.input.empty() || opts.out.empty()) throw std::runtime_error("dirt needs --input/--out");
  fs::create_directories(opts.out + "/masks");
  const PipelineConfig cfg = load_config(opts);
  SequenceReader reader(opts.input);
  const auto& manifest = reader.manifest();
  const auto cam_it = manifest.sensors.find(SensorId::rgbd_floor);
  const Eigen::Matrix4d base_T_cam =
      cam_it != manifest.sensors.end() ? cam_it->second.extrinsics : Eigen::Matrix4d::Identity();

  TemporalMedianFilter median(cfg.dirt.median_window);
  std::vector<std::vector<DirtObservation>> heatmap_frames;
  std::string scores_csv = "frame,block_col,block_row,score\n";
  int frame_idx = 0;
  char buf[128];

  while (auto frame = reader.next()) {
    if (frame->sensor != SensorId::rgbd_floor || !frame->depth || !frame->rgb) continue;
    const DepthFrame& depth = *frame->depth;
    const Pose2D pose = reader.pose_at(frame->timestamp);
    const Eigen::Isometry3d world_T_cam = pose.isometry() * Eigen::Isometry3d(base_T_cam);

    FloorFit floor;
    try {
      floor = fit_floor(depth, cfg.object_fit);
    } catch (const std::exception& e) {
      log_warn("dirt: frame %d floor fit failed (%s), skipping", frame_idx, e.what());
      ++frame_idx;
      continue;
    }
    const ObjectDetection objects = detect_objects(depth, floor.model, cfg.object_detect);

    std::vector<uint8_t> object_mask(objects.mask.size(), 0);
    for (size_t i = 0; i < objects.mask.size(); ++i) {
      if (objects.mask[i] == kMaskObstacle) object_mask[i] = 1;
    }
    // dataset-provided masks override/extend the computed ones
    const auto ext_floor = load_mask_png(floor_masks_dir, frame_idx, depth.width, depth.height);
    const auto ext_laser = load_mask_png(laser_masks_dir, frame_idx, depth.width, depth.height);
    const std::vector<uint8_t>& floor_mask = ext_floor ? *ext_floor : floor.inlier_mask;
    const FloatImage3 lab = rgb_to_lab(*frame->rgb);
    const BlockGrid grid = gradient_blocks(lab, floor_mask, object_mask, cfg.dirt.block_size,
                                           ext_laser ? &*ext_laser : nullptr);
    const auto models = fit_block_models(grid, cfg.dirt.gmm_components,
                                         cfg.dirt.seed + static_cast<uint64_t>(frame_idx));
    const auto scores = score_blocks(grid, models);
    const auto block_mask = dirt_mask(scores, cfg.dirt.threshold);

    for (int br = 0; br < grid.rows; ++br) {
      for (int bc = 0; bc < grid.cols; ++bc) {
        const double s = scores[static_cast<size_t>(br) * grid.cols + bc];
        if (std::isnan(s)) continue;
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.9g\n", frame_idx, bc, br, s);
        scores_csv += buf;
      }
    }

    const auto pixel_mask = expand_block_mask(block_mask, grid.cols, grid.rows,
                                              cfg.dirt.block_size, depth.width, depth.height);
    std::snprintf(buf, sizeof(buf), "%s/masks/%06d.png", opts.out.c_str(), frame_idx);
    png::write_gray8(buf, depth.width, depth.height, pixel_mask);

    // register block centers on the floor surface, median-filter per cell
    std::vector<std::pair<TemporalMedianFilter::CellKey, bool>> obs;
    std::map<TemporalMedianFilter::CellKey, Eigen::Vector2d> cell_pos;
    const auto& intr = depth.intrinsics;
    for (int br = 0; br < grid.rows; ++br) {
      for (int bc = 0; bc < grid.cols; ++bc) {
        const auto& blk = grid.at(bc, br);
        if (!blk.valid) continue;
        const double u = bc * cfg.dirt.block_size + cfg.dirt.block_size / 2.0;
        const double v = br * cfg.dirt.block_size + cfg.dirt.block_size / 2.0;
        const Eigen::Vector3d dir((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
        const double denom = floor.model.normal.dot(dir);
        if (std::abs(denom) < 1e-9) continue;
        const double t = floor.model.offset / denom;
        if (t <= 0) continue;
        const Eigen::Vector3d world = world_T_cam * (t * dir);
        const auto cell =
            TemporalMedianFilter::cell_of(world.x(), world.y(), cfg.dirt.cell_size);
        const bool dirt = block_mask[static_cast<size_t>(br) * grid.cols + bc] != 0;
        obs.push_back({cell, dirt});
        cell_pos[cell] = {world.x(), world.y()};
      }
    }
    const auto filtered = median.push(obs);
    std::vector<DirtObservation> frame_obs;
    for (const auto& [cell, dirt] : filtered) {
      const auto& p = cell_pos[cell];
      frame_obs.push_back({p.x(), p.y(), dirt});
    }
    heatmap_frames.push_back(std::move(frame_obs));
    ++frame_idx;
  }

  write_text(opts.out + "/dirt_scores.csv", scores_csv);
  GridSpec spec;
  spec.cell_size = cfg.analytics.heatmap_cell;
  const HeatmapGrid heatmap = dirt_heatmap(heatmap_frames, spec);
  heatmap.write_png(opts.out + "/dirt_heatmap.png", /*mark_unobserved=*/true);
  write_text(opts.out + "/dirt_heatmap.csv", heatmap.to_csv(/*mark_unobserved=*/true));
  cfg.save(opts.out + "/config.json");
  std::printf("dirt: %d floor frames -> %s\n", frame_idx, opts.out.c_str());
  return 0;
}

int cmd_objects(const CommonOpts& opts, bool write_masks) {
  if (opts.input.empty() || opts.out.empty()) {
    throw std::runtime_error("objects needs --input/--out");
  }
  fs::create_directories(opts.out);
  if (write_masks) fs::create_directories(opts.out + "/obstacle_masks");
  const PipelineConfig cfg = load_config(opts);
  SequenceReader reader(opts.input);

  json frames = json::array();
  int frame_idx = 0;
  char buf[128];
  while (auto frame = reader.next()) {
    if (frame->sensor != SensorId::rgbd_floor || !frame->depth) continue;
    json fj;
    fj["frame"] = frame_idx;
    fj["timestamp"] = frame->timestamp;
    try {
      const FloorFit floor = fit_floor(*frame->depth, cfg.object_fit);
      const ObjectDetection det = detect_objects(*frame->depth, floor.model, cfg.object_detect);
      json boxes = json::array();
      for (size_t i = 0; i < det.boxes.size(); ++i) {
        const auto& b = det.boxes[i];
        boxes.push_back({{"center", {b.center.x(), b.center.y(), b.center.z()}},
                         {"extents", {b.extents.x(), b.extents.y(), b.extents.z()}},
                         {"pixels", det.pixel_counts[i]}});
      }
      fj["boxes"] = boxes;
      fj["floor_inlier_fraction"] = floor.inlier_fraction;
      if (write_masks) {
        std::snprintf(buf, sizeof(buf), "%s/obstacle_masks/%06d.png", opts.out.c_str(),
                      frame_idx);
        png::write_gray8(buf, frame->depth->width, frame->depth->height, det.mask);
      }
    } catch (const std::exception& e) {
      fj["error"] = e.what();
    }
    frames.push_back(std::move(fj));
    ++frame_idx;
  }
  write_text(opts.out + "/objects.json", json(frames).dump(2) + "\n");
  std::printf("objects: %d floor frames -> %s/objects.json\n", frame_idx, opts.out.c_str());
  return 0;
}

// --- evaluation ------------------------------------------------------------------

int cmd_evaluate(const CommonOpts& opts, const std::string& pred_path, const std::string& gt_dir,
                 const std::string& roc_scores_path) {
  if (opts.out.empty()) throw std::runtime_error("evaluate needs --out");
  fs::create_directories(opts.out);
  const PipelineConfig cfg = load_config(opts);
  json metrics;

  if (!pred_path.empty()) {
    if (gt_dir.empty()) throw std::runtime_error("evaluate --pred needs --gt <sequence dir>");
    std::ifstream in(pred_path);
    if (!in) throw std::runtime_error("cannot open " + pred_path);
    json pred_json;
    in >> pred_json;
    const GroundTruth truth = load_ground_truth(gt_dir);

    // index GT frames by timestamp
    std::map<int64_t, int> gt_frame_by_time;
    auto key_of = [](double t) { return static_cast<int64_t>(std::llround(t * 1e6)); };
    for (size_t i = 0; i < truth.walker_boxes.size(); ++i) {
      gt_frame_by_time[key_of(truth.walker_boxes[i].timestamp)] = static_cast<int>(i);
    }

    std::vector<ScoredPrediction> predictions;
    int negatives = pred_json.value("negative_candidates", 0);
    const double thresh = pred_json.value("probability_threshold", 0.5);
    for (const auto& fj : pred_json.at("frames")) {
      const auto it = gt_frame_by_time.find(key_of(fj.at("timestamp").get<double>()));
      if (it == gt_frame_by_time.end()) continue;
      for (const auto& bj : fj.at("boxes")) {
        const double prob = bj.at("probability").get<double>();
        if (prob < thresh) continue;  // counted in negative_candidates upstream
        ScoredPrediction p;
        p.frame = it->second;
        p.score = prob;
        p.box.center = {bj.at("center")[0].get<double>(), bj.at("center")[1].get<double>(),
                        bj.at("center")[2].get<double>()};
        p.box.extents = {bj.at("extents")[0].get<double>(), bj.at("extents")[1].get<double>(),
                         bj.at("extents")[2].get<double>()};
        predictions.push_back(p);
      }
    }
    std::vector<GroundTruthBox> gt;
    for (size_t i = 0; i < truth.walker_boxes.size(); ++i) {
      for (const auto& b : truth.walker_boxes[i].boxes) {
        gt.push_back({b, static_cast<int>(i)});
      }
    }
    const DetectionMetrics m =
        detection_metrics(predictions, gt, cfg.analytics.iou_threshold, negatives);
    metrics["detection"] = {{"true_positives", m.true_positives},
                            {"false_positives", m.false_positives},
                            {"false_negatives", m.false_negatives},
                            {"true_negatives", m.true_negatives},
                            {"precision", m.precision},
                            {"precision_defined", m.precision_defined},
                            {"recall", m.recall},
                            {"f1", m.f1},
                            {"average_precision", m.average_precision},
                            {"iou_threshold", cfg.analytics.iou_threshold}};
    if (m.accuracy) metrics["detection"]["accuracy"] = *m.accuracy;
  }

  if (!roc_scores_path.empty()) {
    if (gt_dir.empty()) throw std::runtime_error("evaluate --roc-scores needs --gt <sequence dir>");
    const GroundTruth truth = load_ground_truth(gt_dir);
    if (truth.dirt_masks.empty()) throw std::runtime_error("no gt_dirt masks in " + gt_dir);

    std::ifstream in(roc_scores_path);
    if (!in) throw std::runtime_error("cannot open " + roc_scores_path);
    std::vector<double> scores;
    std::vector<uint8_t> labels;
    std::string line;
    std::getline(in, line);  // header
    const int block = cfg.dirt.block_size;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      int frame, bc, br;
      double score;
      if (std::sscanf(line.c_str(), "%d,%d,%d,%lf", &frame, &bc, &br, &score) != 4) continue;
      if (frame < 0 || frame >= static_cast<int>(truth.dirt_masks.size())) continue;
      const auto& mask = truth.dirt_masks[frame];
      int dirt_px = 0;
      for (int dv = 0; dv < block; ++dv) {
        for (int du = 0; du < block; ++du) {
          const int u = bc * block + du, v = br * block + dv;
          if (u < mask.width && v < mask.height &&
              mask.mask[static_cast<size_t>(v) * mask.width + u]) {
            ++dirt_px;
          }
        }
      }
      scores.push_back(score);
      labels.push_back(2 * dirt_px > block * block ? 1 : 0);
    }
    const RocCurve curve = roc_points(scores, labels);
    std::string csv = "fpr,tpr,threshold\n";
    char buf[128];
    for (const auto& p : curve.points) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", p.fpr, p.tpr, p.threshold);
      csv += buf;
    }
    write_text(opts.out + "/roc.csv", csv);
    metrics["roc"] = {{"auc", curve.auc}, {"points", curve.points.size()},
                      {"blocks", scores.size()}};
  }

  write_text(opts.out + "/metrics.json", metrics.dump(2) + "\n");
  std::printf("evaluate: wrote %s/metrics.json\n", opts.out.c_str());
  return 0;
}

int cmd_heatmap(const CommonOpts& opts, const std::string& tracks_path, bool dwell) {
  if (opts.out.empty()) throw std::runtime_error("heatmap needs --out");
  fs::create_directories(opts.out);
  const PipelineConfig cfg = load_config(opts);

  std::ifstream in(tracks_path);
  if (!in) throw std::runtime_error("cannot open " + tracks_path);
  std::map<int, std::vector<Eigen::Vector2d>> by_id;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double t, x, y;
    int id;
    if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf", &t, &id, &x, &y) != 4) continue;
    by_id[id].push_back({x, y});
  }
  std::vector<std::vector<Eigen::Vector2d>> trajectories;
  for (auto& [id, traj] : by_id) trajectories.push_back(std::move(traj));

  GridSpec spec;
  spec.cell_size = cfg.analytics.heatmap_cell;
  const HeatmapGrid grid = trajectory_heatmap(trajectories, spec, dwell);
  grid.write_png(opts.out + "/trajectory_heatmap.png");
  write_text(opts.out + "/trajectory_heatmap.csv", grid.to_csv());
  std::printf("heatmap: %zu trajectories -> %s\n", trajectories.size(), opts.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floor-scrubber perception toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand name

  CommonOpts opts;
  app.add_option("--config", opts.config_path, "pipeline config JSON")->envname("SCRUBBER_CONFIG");
  app.add_option("--seed", opts.seed, "RNG seed");
  app.add_option("--input", opts.input, "input sequence directory");
  app.add_option("--out", opts.out, "output directory");
  app.add_option("--detectors", opts.detectors,
                 "enabled detectors (lidar3d,rgbd_legs,laser_legs)")
      ->delimiter(',');

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  int walkers = 1, dirt_spots = 0, boxes = 0, train_count = 150;
  double duration = 5.0, rate = 10.0, robot_speed = 0.0;
  bool forward_camera = false;
  std::string clusters_out, legs_out;
  synth->add_option("--walkers", walkers);
  synth->add_option("--dirt-spots", dirt_spots);
  synth->add_option("--boxes", boxes);
  synth->add_option("--duration", duration);
  synth->add_option("--rate", rate);
  synth->add_option("--robot-speed", robot_speed);
  synth->add_flag("--forward", forward_camera, "emit the forward RGB-D camera");
  synth->add_option("--clusters-out", clusters_out, "also emit labeled training clusters");
  synth->add_option("--legs-out", legs_out, "also emit labeled training scans");
  synth->add_option("--train-count", train_count, "training examples per class");

  // train-svm
  auto* train_svm = app.add_subcommand("train-svm", "train the lidar human classifier");
  std::string pos_dir, neg_dir, grid_c, grid_gamma, model_out = "svm_model.json";
  std::vector<std::string> grid_spec;
  int folds = 5;
  train_svm->add_option("--pos", pos_dir)->required();
  train_svm->add_option("--neg", neg_dir)->required();
  train_svm->add_option("--folds", folds);
  train_svm->add_option("--grid", grid_spec,
                        "grid as c=0.1,1,10 gamma=0.01,0.1,1 (space-separated assignments)");
  train_svm->add_option("--grid-c", grid_c, "comma-separated C candidates");
  train_svm->add_option("--grid-gamma", grid_gamma, "comma-separated gamma candidates");
  train_svm->add_option("--model-out", model_out);

  // train-legs2d
  auto* train_legs = app.add_subcommand("train-legs2d", "train the 2D laser leg classifier");
  std::string legs_pos, legs_neg, legs_model_out = "legs_model.json";
  int rounds = 50;
  train_legs->add_option("--pos", legs_pos)->required();
  train_legs->add_option("--neg", legs_neg)->required();
  train_legs->add_option("--rounds", rounds);
  train_legs->add_option("--model-out", legs_model_out);

  auto* detect = app.add_subcommand("detect", "run detectors, write per-frame detections");

  auto* track = app.add_subcommand("track", "run detectors + tracker, write tracks CSV");
  std::string detections_path;
  track->add_option("--detections", detections_path, "replay precomputed detections.json");

  auto* dirt = app.add_subcommand("dirt", "dirt detection masks + heatmap");
  std::string floor_masks_dir, laser_masks_dir;
  dirt->add_option("--floor-masks", floor_masks_dir,
                   "dataset floor masks (PNG per frame) instead of the fitted floor");
  dirt->add_option("--laser-masks", laser_masks_dir,
                   "laser-marking masks (PNG per frame) to discard");

  auto* objects = app.add_subcommand("objects", "floor obstacle boxes");
  bool write_masks = false;
  objects->add_flag("--masks", write_masks, "also write obstacle mask PNGs");

  auto* evaluate = app.add_subcommand("evaluate", "detection metrics and/or dirt ROC");
  std::string pred_path, gt_dir, roc_scores;
  evaluate->add_option("--pred", pred_path, "boxes.json from detect");
  evaluate->add_option("--gt", gt_dir, "sequence directory holding gt.json / gt_dirt");
  evaluate->add_option("--roc-scores", roc_scores, "dirt_scores.csv from dirt");

  auto* heatmap = app.add_subcommand("heatmap", "trajectory heatmap from tracks CSV");
  std::string tracks_path;
  bool dwell = false;
  heatmap->add_option("--tracks", tracks_path)->required();
  heatmap->add_flag("--dwell", dwell, "count dwell time instead of trajectories");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      return cmd_synth(opts, walkers, dirt_spots, boxes, duration, rate, robot_speed,
                       forward_camera, clusters_out, train_count, legs_out);
    }
    if (train_svm->parsed()) {
      for (const auto& assign : grid_spec) {
        if (assign.rfind("c=", 0) == 0) grid_c = assign.substr(2);
        else if (assign.rfind("gamma=", 0) == 0) grid_gamma = assign.substr(6);
        else throw std::runtime_error("--grid expects c=... and gamma=... assignments");
      }
      return cmd_train_svm(opts, pos_dir, neg_dir, folds, grid_c, grid_gamma, model_out);
    }
    if (train_legs->parsed()) {
      return cmd_train_legs2d(opts, legs_pos, legs_neg, rounds, legs_model_out);
    }
    if (detect->parsed()) return cmd_detect(opts);
    if (track->parsed()) return cmd_track(opts, detections_path);
    if (dirt->parsed()) return cmd_dirt(opts, floor_masks_dir, laser_masks_dir);
    if (objects->parsed()) return cmd_objects(opts, write_masks);
    if (evaluate->parsed()) return cmd_evaluate(opts, pred_path, gt_dir, roc_scores);
    if (heatmap->parsed()) return cmd_heatmap(opts, tracks_path, dwell);
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::printf("%s\n", err.dump().c_str());
    return 1;
  }
  return 0;
}
