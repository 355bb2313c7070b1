// Python bindings for the perception core: numpy in, numpy out for array
// payloads, thin classes for models and the tracker.
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scrubber/analytics.hpp"
#include "scrubber/clustering.hpp"
#include "scrubber/dirt.hpp"
#include "scrubber/features.hpp"
#include "scrubber/floor_objects.hpp"
#include "scrubber/legs_laser.hpp"
#include "scrubber/legs_rgbd.hpp"
#include "scrubber/sequence.hpp"
#include "scrubber/svm.hpp"
#include "scrubber/synthetic.hpp"
#include "scrubber/tracking.hpp"

namespace py = pybind11;
using namespace scrubber;

namespace {

PointCloud3D cloud_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 4) {
    throw std::invalid_argument("cloud must be an (N, 4) array of x, y, z, intensity");
  }
  PointCloud3D cloud;
  cloud.points.resize(arr.shape(0));
  const auto view = arr.unchecked<2>();
  for (py::ssize_t i = 0; i < arr.shape(0); ++i) {
    cloud.points[i] = {view(i, 0), view(i, 1), view(i, 2), view(i, 3)};
  }
  return cloud;
}

py::array_t<float> cloud_to_array(const PointCloud3D& cloud) {
  py::array_t<float> arr({static_cast<py::ssize_t>(cloud.size()), py::ssize_t(4)});
  auto view = arr.mutable_unchecked<2>();
  for (size_t i = 0; i < cloud.size(); ++i) {
    view(i, 0) = cloud.points[i].x;
    view(i, 1) = cloud.points[i].y;
    view(i, 2) = cloud.points[i].z;
    view(i, 3) = cloud.points[i].intensity;
  }
  return arr;
}

Cluster whole_cloud_cluster(const PointCloud3D& cloud) {
  Cluster c;
  c.indices.resize(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) c.indices[i] = static_cast<int>(i);
  c.bbox = bounding_box(cloud.points);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) sum += p.position();
  if (!cloud.empty()) c.centroid = sum / static_cast<double>(cloud.size());
  return c;
}

DepthFrame depth_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr,
                            double fx, double fy, double cx, double cy) {
  if (arr.ndim() != 2) throw std::invalid_argument("depth must be an (H, W) array of meters");
  DepthFrame f;
  f.height = static_cast<int>(arr.shape(0));
  f.width = static_cast<int>(arr.shape(1));
  f.intrinsics = {fx, fy, cx, cy};
  f.depth.assign(arr.data(), arr.data() + arr.size());
  return f;
}

ColorFrame rgb_from_array(const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 3) {
    throw std::invalid_argument("rgb must be an (H, W, 3) uint8 array");
  }
  ColorFrame f;
  f.height = static_cast<int>(arr.shape(0));
  f.width = static_cast<int>(arr.shape(1));
  f.rgb.assign(arr.data(), arr.data() + arr.size());
  return f;
}

std::vector<uint8_t> mask_from_array(
    const py::array_t<uint8_t, py::array::c_style | py::array::forcecast>& arr) {
  return {arr.data(), arr.data() + arr.size()};
}

Detection detection_from_tuple(double x, double y, const std::string& source, double sigma,
                               double confidence, double timestamp) {
  Detection d;
  d.position = {x, y};
  d.covariance = Eigen::Matrix2d::Identity() * sigma * sigma;
  d.source = detection_source_from_string(source);
  d.confidence = confidence;
  d.timestamp = timestamp;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Floor-scrubber perception toolkit (C++ core)";

  py::class_<BoundingBox3D>(m, "BoundingBox3D")
      .def(py::init([](const Eigen::Vector3d& center, const Eigen::Vector3d& extents) {
             BoundingBox3D b;
             b.center = center;
             b.extents = extents;
             return b;
           }),
           py::arg("center"), py::arg("extents"))
      .def_readwrite("center", &BoundingBox3D::center)
      .def_readwrite("extents", &BoundingBox3D::extents)
      .def_property_readonly("volume", &BoundingBox3D::volume)
      .def("__repr__", [](const BoundingBox3D& b) {
        return "BoundingBox3D(center=(" + std::to_string(b.center.x()) + ", " +
               std::to_string(b.center.y()) + ", " + std::to_string(b.center.z()) + "))";
      });

  py::class_<Cluster>(m, "Cluster")
      .def_readonly("indices", &Cluster::indices)
      .def_readonly("bbox", &Cluster::bbox)
      .def_readonly("centroid", &Cluster::centroid);

  // --- clustering ---------------------------------------------------------
  m.def(
      "voxel_downsample",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> cloud, double leaf) {
        return cloud_to_array(voxel_downsample(cloud_from_array(cloud), leaf));
      },
      py::arg("cloud"), py::arg("leaf"));
  m.def(
      "remove_planes",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> cloud, double threshold,
         double min_fraction, uint64_t seed) {
        return cloud_to_array(
            remove_planes(cloud_from_array(cloud), threshold, min_fraction, seed));
      },
      py::arg("cloud"), py::arg("inlier_threshold") = 0.02,
      py::arg("min_inlier_fraction") = 0.2, py::arg("seed") = 1);
  m.def(
      "euclidean_cluster",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> cloud, double tolerance,
         int min_size, int max_size) {
        return euclidean_cluster(cloud_from_array(cloud), tolerance, min_size, max_size);
      },
      py::arg("cloud"), py::arg("tolerance") = 0.45, py::arg("min_size") = 5,
      py::arg("max_size") = 30000);
  m.def(
      "adaptive_cluster",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> cloud,
         const std::vector<std::pair<double, double>>& schedule, int min_size, int max_size) {
        std::vector<RingStep> rings;
        for (const auto& [radius, tol] : schedule) rings.push_back({radius, tol});
        return adaptive_cluster(cloud_from_array(cloud), rings, min_size, max_size);
      },
      py::arg("cloud"), py::arg("ring_schedule"), py::arg("min_size") = 5,
      py::arg("max_size") = 30000);
  m.def("volumetric_filter", py::overload_cast<const std::vector<Cluster>&>(&volumetric_filter),
        py::arg("clusters"));
  m.def("human_candidate_extents", &human_candidate_extents, py::arg("extents"));

  // --- features / SVM -------------------------------------------------------
  m.def(
      "extract_features",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> cloud) {
        const PointCloud3D c = cloud_from_array(cloud);
        const FeatureVector f = extract_features(whole_cloud_cluster(c), c);
        return py::array_t<double>(f.size(), f.data());
      },
      py::arg("cloud"), "71-dim descriptor of a single-cluster cloud");

  py::class_<SvmModel>(m, "SvmModel")
      .def_property_readonly("gamma", [](const SvmModel& m) { return m.gamma; })
      .def_property_readonly("cost", [](const SvmModel& m) { return m.cost; })
      .def_property_readonly("n_support_vectors",
                             [](const SvmModel& m) { return m.support_vectors.size(); })
      .def("predict",
           [](const SvmModel& model, const std::vector<double>& features) {
             const SvmPrediction p = svm_predict(model, features);
             return py::make_tuple(p.label, p.probability);
           })
      .def("decision", &svm_decision)
      .def("save", &save_svm_model, py::arg("path"))
      .def_static("load", &load_svm_model, py::arg("path"));

  m.def(
      "svm_train",
      [](const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
         const std::vector<double>& grid_c, const std::vector<double>& grid_gamma, int folds) {
        if (features.size() != labels.size()) {
          throw std::invalid_argument("features/labels size mismatch");
        }
        std::vector<SvmExample> ex;
        for (size_t i = 0; i < features.size(); ++i) ex.push_back({features[i], labels[i]});
        SvmGrid grid;
        if (!grid_c.empty()) grid.cost_candidates = grid_c;
        if (!grid_gamma.empty()) grid.gamma_candidates = grid_gamma;
        return svm_train(ex, grid, folds);
      },
      py::arg("features"), py::arg("labels"), py::arg("grid_c") = std::vector<double>{},
      py::arg("grid_gamma") = std::vector<double>{}, py::arg("folds") = 5);

  // --- legs -----------------------------------------------------------------
  m.def("cosine_similarity",
        py::overload_cast<const std::vector<double>&, const std::vector<double>&>(
            &cosine_similarity),
        py::arg("a"), py::arg("b"));
  m.def(
      "segment_scan",
      [](double angle_min, double angle_increment, const std::vector<double>& ranges,
         double range_max, double jump_threshold) {
        LaserScan2D scan;
        scan.angle_min = angle_min;
        scan.angle_increment = angle_increment;
        scan.ranges = ranges;
        scan.range_max = range_max;
        py::list out;
        for (const auto& seg : segment_scan(scan, jump_threshold)) {
          py::array_t<double> pts({static_cast<py::ssize_t>(seg.points.size()), py::ssize_t(2)});
          auto view = pts.mutable_unchecked<2>();
          for (size_t i = 0; i < seg.points.size(); ++i) {
            view(i, 0) = seg.points[i].x();
            view(i, 1) = seg.points[i].y();
          }
          out.append(py::make_tuple(
              pts, py::array_t<double>(seg.features.size(), seg.features.data())));
        }
        return out;
      },
      py::arg("angle_min"), py::arg("angle_increment"), py::arg("ranges"),
      py::arg("range_max") = 30.0, py::arg("jump_threshold") = 0.15);

  py::class_<AdaBoostModel>(m, "AdaBoostModel")
      .def_property_readonly("n_stumps",
                             [](const AdaBoostModel& m) { return m.stumps.size(); })
      .def("classify",
           [](const AdaBoostModel& model, const std::vector<double>& features) {
             const AdaBoostResult r = adaboost_classify(model, features);
             return py::make_tuple(r.label, r.margin);
           })
      .def("save", &save_adaboost_model, py::arg("path"))
      .def_static("load", &load_adaboost_model, py::arg("path"));
  m.def(
      "adaboost_train",
      [](const std::vector<std::vector<double>>& features, const std::vector<int>& labels,
         int rounds) {
        std::vector<AdaBoostExample> ex;
        for (size_t i = 0; i < features.size(); ++i) ex.push_back({features[i], labels[i]});
        return adaboost_train(ex, rounds);
      },
      py::arg("features"), py::arg("labels"), py::arg("rounds") = 50);

  // --- tracking ---------------------------------------------------------------
  m.def("chi2_threshold_2dof", &chi2_threshold_2dof, py::arg("gate_probability"));

  py::class_<Tracker>(m, "Tracker")
      .def(py::init([](double process_noise, double gate_probability, int confirm_hits,
                       double confirm_window, double deletion_timeout,
                       const std::string& association, const std::string& filter) {
             TrackerConfig cfg;
             cfg.process_noise_intensity = process_noise;
             cfg.gate_probability = gate_probability;
             cfg.confirm_hits = confirm_hits;
             cfg.confirm_window = confirm_window;
             cfg.deletion_timeout = deletion_timeout;
             cfg.association = association == "nnjpda" ? AssociationMode::nnjpda
                                                       : AssociationMode::nearest_neighbor;
             cfg.filter = filter == "ukf" ? FilterKind::ukf : FilterKind::ekf;
             return Tracker(cfg);
           }),
           py::arg("process_noise") = 0.5, py::arg("gate_probability") = 0.95,
           py::arg("confirm_hits") = 3, py::arg("confirm_window") = 1.0,
           py::arg("deletion_timeout") = 2.0, py::arg("association") = "nn",
           py::arg("filter") = "ekf")
      .def(
          "step",
          [](Tracker& tracker,
             const std::vector<std::tuple<double, double, std::string>>& detections,
             double timestamp) {
            std::vector<Detection> dets;
            for (const auto& [x, y, source] : detections) {
              Detection d = detection_from_tuple(x, y, source, 0.1, 1.0, timestamp);
              dets.push_back(d);
            }
            py::list out;
            for (const auto& tr : tracker.step(dets, timestamp)) {
              py::dict row;
              row["id"] = tr.id;
              row["x"] = tr.mean[0];
              row["y"] = tr.mean[1];
              row["vx"] = tr.mean[2];
              row["vy"] = tr.mean[3];
              out.append(row);
            }
            return out;
          },
          py::arg("detections"), py::arg("timestamp"),
          "detections: list of (x, y, source) tuples sharing the timestamp");

  // --- floor objects -----------------------------------------------------------
  m.def(
      "noise_sigma", [](double z) { return NoiseModel{}.sigma(z); }, py::arg("z"),
      "structured-light axial noise sigma(z)");
  m.def(
      "detect_floor_objects",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> depth, double fx,
         double fy, double cx, double cy, uint64_t seed) {
        FloorFitParams params;
        params.ransac_seed = seed;
        const DepthFrame frame = depth_from_array(depth, fx, fy, cx, cy);
        const FloorFit fit = fit_floor(frame, params);
        const ObjectDetection det = detect_objects(frame, fit.model);
        py::array_t<uint8_t> mask({static_cast<py::ssize_t>(frame.height),
                                   static_cast<py::ssize_t>(frame.width)});
        std::copy(det.mask.begin(), det.mask.end(), mask.mutable_data());
        py::list boxes;
        for (size_t i = 0; i < det.boxes.size(); ++i) {
          py::dict b;
          b["center"] = det.boxes[i].center;
          b["extents"] = det.boxes[i].extents;
          b["pixels"] = det.pixel_counts[i];
          boxes.append(b);
        }
        py::dict out;
        out["mask"] = mask;
        out["boxes"] = boxes;
        out["floor_inlier_fraction"] = fit.inlier_fraction;
        return out;
      },
      py::arg("depth"), py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"),
      py::arg("seed") = 1);

  // --- dirt ---------------------------------------------------------------------
  m.def(
      "rgb_to_lab",
      [](py::array_t<uint8_t, py::array::c_style | py::array::forcecast> rgb) {
        const FloatImage3 lab = rgb_to_lab(rgb_from_array(rgb));
        py::array_t<float> out({static_cast<py::ssize_t>(lab.height),
                                static_cast<py::ssize_t>(lab.width), py::ssize_t(3)});
        std::copy(lab.data.begin(), lab.data.end(), out.mutable_data());
        return out;
      },
      py::arg("rgb"));
  m.def(
      "dirt_block_scores",
      [](py::array_t<uint8_t, py::array::c_style | py::array::forcecast> rgb,
         py::array_t<uint8_t, py::array::c_style | py::array::forcecast> floor_mask,
         py::array_t<uint8_t, py::array::c_style | py::array::forcecast> object_mask,
         int block_size, int components, uint64_t seed, double percentile) {
        const FloatImage3 lab = rgb_to_lab(rgb_from_array(rgb));
        const BlockGrid grid = gradient_blocks(lab, mask_from_array(floor_mask),
                                               mask_from_array(object_mask), block_size);
        const auto models = fit_block_models(grid, components, seed);
        const auto scores = score_blocks(grid, models);
        DirtThreshold threshold;
        threshold.percentile = percentile;
        const auto mask = dirt_mask(scores, threshold);
        py::array_t<double> score_arr({static_cast<py::ssize_t>(grid.rows),
                                       static_cast<py::ssize_t>(grid.cols)});
        py::array_t<uint8_t> mask_arr({static_cast<py::ssize_t>(grid.rows),
                                       static_cast<py::ssize_t>(grid.cols)});
        std::copy(scores.begin(), scores.end(), score_arr.mutable_data());
        std::copy(mask.begin(), mask.end(), mask_arr.mutable_data());
        return py::make_tuple(score_arr, mask_arr);
      },
      py::arg("rgb"), py::arg("floor_mask"), py::arg("object_mask"), py::arg("block_size") = 16,
      py::arg("components") = 3, py::arg("seed") = 1, py::arg("percentile") = 5.0);
  m.def(
      "fit_gmm",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> samples, int components,
         uint64_t seed) {
        if (samples.ndim() != 2 || samples.shape(1) != 2) {
          throw std::invalid_argument("samples must be (N, 2)");
        }
        std::vector<Eigen::Vector2d> s(samples.shape(0));
        const auto view = samples.unchecked<2>();
        for (py::ssize_t i = 0; i < samples.shape(0); ++i) s[i] = {view(i, 0), view(i, 1)};
        const GmmModel model = fit_gmm(s, components, seed);
        py::list out;
        for (const auto& c : model.components) {
          py::dict comp;
          comp["weight"] = c.weight;
          comp["mean"] = c.mean;
          comp["covariance"] = c.covariance;
          out.append(comp);
        }
        return out;
      },
      py::arg("samples"), py::arg("components") = 3, py::arg("seed") = 1);

  // --- analytics -------------------------------------------------------------------
  m.def(
      "iou3d",
      [](const BoundingBox3D& a, const BoundingBox3D& b) { return iou3d(a, b); },
      py::arg("a"), py::arg("b"));
  m.def(
      "detection_metrics",
      [](const std::vector<std::tuple<BoundingBox3D, double, int>>& predictions,
         const std::vector<std::tuple<BoundingBox3D, int>>& ground_truth, double iou_threshold,
         std::optional<int> negatives) {
        std::vector<ScoredPrediction> preds;
        for (const auto& [box, score, frame] : predictions) preds.push_back({box, score, frame});
        std::vector<GroundTruthBox> gt;
        for (const auto& [box, frame] : ground_truth) gt.push_back({box, frame});
        const DetectionMetrics res = detection_metrics(preds, gt, iou_threshold, negatives);
        py::dict out;
        out["precision"] = res.precision;
        out["recall"] = res.recall;
        out["f1"] = res.f1;
        out["average_precision"] = res.average_precision;
        out["true_positives"] = res.true_positives;
        out["false_positives"] = res.false_positives;
        out["false_negatives"] = res.false_negatives;
        if (res.accuracy) out["accuracy"] = *res.accuracy;
        return out;
      },
      py::arg("predictions"), py::arg("ground_truth"), py::arg("iou_threshold") = 0.5,
      py::arg("negatives") = std::nullopt);
  m.def(
      "roc_points",
      [](const std::vector<double>& scores, const std::vector<int>& labels) {
        std::vector<uint8_t> l(labels.size());
        for (size_t i = 0; i < labels.size(); ++i) l[i] = labels[i] ? 1 : 0;
        const RocCurve curve = roc_points(scores, l);
        py::array_t<double> pts({static_cast<py::ssize_t>(curve.points.size()), py::ssize_t(2)});
        auto view = pts.mutable_unchecked<2>();
        for (size_t i = 0; i < curve.points.size(); ++i) {
          view(i, 0) = curve.points[i].fpr;
          view(i, 1) = curve.points[i].tpr;
        }
        return py::make_tuple(pts, curve.auc);
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "trajectory_heatmap",
      [](const std::vector<std::vector<std::pair<double, double>>>& trajectories,
         double cell_size) {
        std::vector<std::vector<Eigen::Vector2d>> trajs;
        for (const auto& t : trajectories) {
          std::vector<Eigen::Vector2d> traj;
          for (const auto& [x, y] : t) traj.push_back({x, y});
          trajs.push_back(std::move(traj));
        }
        GridSpec spec;
        spec.cell_size = cell_size;
        const HeatmapGrid grid = trajectory_heatmap(trajs, spec);
        py::array_t<double> counts({static_cast<py::ssize_t>(grid.height()),
                                    static_cast<py::ssize_t>(grid.width())});
        auto view = counts.mutable_unchecked<2>();
        for (int cy = 0; cy < grid.height(); ++cy) {
          for (int cx = 0; cx < grid.width(); ++cx) view(cy, cx) = grid.count(cx, cy);
        }
        py::dict out;
        out["counts"] = counts;
        out["origin"] = py::make_tuple(grid.origin_x(), grid.origin_y());
        out["cell_size"] = grid.cell_size();
        return out;
      },
      py::arg("trajectories"), py::arg("cell_size") = 0.2);

  // --- synthetic scenes / sequences -----------------------------------------------
  m.def(
      "generate_scene",
      [](const std::string& path, uint64_t seed,
         const std::vector<std::tuple<double, double, double, double>>& walkers,
         double duration, double rate, int dirt_spots, double robot_speed) {
        SceneSpec spec;
        spec.duration = duration;
        spec.rate = rate;
        spec.robot_speed = robot_speed;
        for (const auto& [x0, y0, vx, vy] : walkers) {
          WalkerSpec w;
          w.x0 = x0;
          w.y0 = y0;
          w.vx = vx;
          w.vy = vy;
          spec.walkers.push_back(w);
        }
        for (int i = 0; i < dirt_spots; ++i) {
          spec.dirt_spots.push_back({0.75 + 0.4 * i, i % 2 ? -0.1 : 0.1, 0.09});
        }
        save_scene(generate_synthetic_scene(spec, seed), path);
      },
      py::arg("path"), py::arg("seed") = 1,
      py::arg("walkers") = std::vector<std::tuple<double, double, double, double>>{},
      py::arg("duration") = 2.0, py::arg("rate") = 10.0, py::arg("dirt_spots") = 0,
      py::arg("robot_speed") = 0.0);
  m.def(
      "sequence_summary",
      [](const std::string& path) {
        SequenceReader reader(path);
        py::dict out;
        out["frames"] = reader.size();
        out["poses"] = reader.poses().size();
        py::list sensors;
        for (const auto& [id, info] : reader.manifest().sensors) {
          sensors.append(std::string(to_string(id)));
        }
        out["sensors"] = sensors;
        return out;
      },
      py::arg("path"));
  m.def(
      "load_cloud",
      [](const std::string& path) { return cloud_to_array(read_cloud_bin(path)); },
      py::arg("path"), "reads a clouds/NNNNNN.bin file into an (N, 4) array");
}
