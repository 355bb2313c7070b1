#include "scrubber/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "scrubber/png_io.hpp"
#include "scrubber/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace scrubber {

namespace {

constexpr double kLidarHeight = 0.8;
constexpr double kLaserHeight = 0.119;
constexpr double kForwardCamHeight = 0.55;
constexpr double kFloorCamHeight = 0.72;
constexpr double kFloorCamForwardOffset = 0.5;

uint8_t clamp_u8(double v) { return static_cast<uint8_t>(std::clamp(v, 0.0, 255.0)); }

float clip_intensity(double v) { return static_cast<float>(std::clamp(v, 0.0, 255.0)); }

struct WalkerState {
  Eigen::Vector2d pos;
  Eigen::Vector2d vel;
  const WalkerSpec* spec;

  Eigen::Vector2d leg_offset() const {
    Eigen::Vector2d perp(0.0, 1.0);
    if (vel.norm() > 1e-9) perp = Eigen::Vector2d(-vel.y(), vel.x()).normalized();
    return perp * (spec->leg_separation * 0.5);
  }
};

// --- 2D ray casting for the laser -------------------------------------------

double ray_circle(const Eigen::Vector2d& o, const Eigen::Vector2d& d, const Eigen::Vector2d& c,
                  double r) {
  const Eigen::Vector2d oc = o - c;
  const double b = oc.dot(d);
  const double disc = b * b - (oc.squaredNorm() - r * r);
  if (disc < 0.0) return -1.0;
  const double s = std::sqrt(disc);
  const double t1 = -b - s;
  if (t1 > 1e-9) return t1;
  const double t2 = -b + s;
  return t2 > 1e-9 ? t2 : -1.0;
}

double ray_segment(const Eigen::Vector2d& o, const Eigen::Vector2d& d, const Eigen::Vector2d& a,
                   const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double denom = d.x() * (-ab.y()) - d.y() * (-ab.x());
  if (std::abs(denom) < 1e-12) return -1.0;
  const Eigen::Vector2d ao = a - o;
  const double t = (ao.x() * (-ab.y()) - ao.y() * (-ab.x())) / denom;
  const double u = (d.x() * ao.y() - d.y() * ao.x()) / denom;
  if (t > 1e-9 && u >= 0.0 && u <= 1.0) return t;
  return -1.0;
}

double ray_rect(const Eigen::Vector2d& o, const Eigen::Vector2d& d, double cx, double cy,
                double w, double dd) {
  const Eigen::Vector2d c00(cx - w / 2, cy - dd / 2), c10(cx + w / 2, cy - dd / 2);
  const Eigen::Vector2d c11(cx + w / 2, cy + dd / 2), c01(cx - w / 2, cy + dd / 2);
  double best = -1.0;
  for (const auto& [a, b] : {std::pair{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}}) {
    const double t = ray_segment(o, d, a, b);
    if (t > 0.0 && (best < 0.0 || t < best)) best = t;
  }
  return best;
}

// --- cloud sampling ----------------------------------------------------------

void sample_cylinder(Rng& rng, const Eigen::Vector3d& base, double radius, double height,
                     int count, double intensity_mean, double intensity_std,
                     std::vector<Point3D>* out) {
  for (int i = 0; i < count; ++i) {
    const double theta = rng.uniform(0.0, 2.0 * M_PI);
    const double z = rng.uniform(0.0, height);
    const double r = radius + rng.normal(0.0, 0.004);
    out->push_back({static_cast<float>(base.x() + r * std::cos(theta)),
                    static_cast<float>(base.y() + r * std::sin(theta)),
                    static_cast<float>(base.z() + z),
                    clip_intensity(rng.normal(intensity_mean, intensity_std))});
  }
}

void sample_box(Rng& rng, const BoxSpec& box, int count, std::vector<Point3D>* out) {
  // faces weighted by area: 4 sides + top
  const double a_side_x = box.w * box.h;  // faces normal to y
  const double a_side_y = box.d * box.h;  // faces normal to x
  const double a_top = box.w * box.d;
  const double total = 2 * a_side_x + 2 * a_side_y + a_top;
  for (int i = 0; i < count; ++i) {
    const double pick = rng.uniform(0.0, total);
    double x, y, z;
    if (pick < 2 * a_side_x) {
      x = rng.uniform(-box.w / 2, box.w / 2);
      z = rng.uniform(0.0, box.h);
      y = (pick < a_side_x) ? -box.d / 2 : box.d / 2;
    } else if (pick < 2 * a_side_x + 2 * a_side_y) {
      y = rng.uniform(-box.d / 2, box.d / 2);
      z = rng.uniform(0.0, box.h);
      x = (pick < 2 * a_side_x + a_side_y) ? -box.w / 2 : box.w / 2;
    } else {
      x = rng.uniform(-box.w / 2, box.w / 2);
      y = rng.uniform(-box.d / 2, box.d / 2);
      z = box.h;
    }
    out->push_back({static_cast<float>(box.x + x + rng.normal(0.0, 0.004)),
                    static_cast<float>(box.y + y + rng.normal(0.0, 0.004)),
                    static_cast<float>(z + rng.normal(0.0, 0.004)),
                    clip_intensity(rng.normal(box.intensity_mean, 15.0))});
  }
}

// --- floor camera render ------------------------------------------------------

struct FloorPixel {
  double depth;  // along optical axis
  uint8_t r, g, b;
  bool dirt;
};

FloorPixel render_floor_pixel(const SceneSpec& spec, double cam_x, double cam_y, double xw,
                              double yw, Rng& rng) {
  FloorPixel px{kFloorCamHeight, 0, 0, 0, false};

  // protruding boxes occlude the floor (nadir view: top faces only)
  for (const auto& box : spec.boxes) {
    if (box.h >= kFloorCamHeight) continue;
    // project along the (slightly oblique) ray: scale floor hit towards camera
    const double s = (kFloorCamHeight - box.h) / kFloorCamHeight;
    const double bx = cam_x + (xw - cam_x) * s;
    const double by = cam_y + (yw - cam_y) * s;
    if (std::abs(bx - box.x) <= box.w / 2 && std::abs(by - box.y) <= box.d / 2) {
      px.depth = kFloorCamHeight - box.h;
      const double shade = rng.normal(150.0, spec.floor.noise_std);
      px.r = px.g = px.b = clamp_u8(shade);
      return px;
    }
  }

  double r = spec.floor.base_color[0];
  double g = spec.floor.base_color[1];
  double b = spec.floor.base_color[2];
  if (spec.floor.tile_size > 0.0) {
    auto frac = [&](double v) {
      double f = std::fmod(v, spec.floor.tile_size);
      if (f < 0) f += spec.floor.tile_size;
      return f;
    };
    const double line = 0.012;
    if (frac(xw) < line || frac(yw) < line) {
      r -= spec.floor.tile_darken;
      g -= spec.floor.tile_darken;
      b -= spec.floor.tile_darken;
    }
  }
  double extra_noise = 0.0;
  for (const auto& spot : spec.dirt_spots) {
    const double dx = xw - spot.x, dy = yw - spot.y;
    if (dx * dx + dy * dy <= spot.radius * spot.radius) {
      r += spot.color_shift[0];
      g += spot.color_shift[1];
      b += spot.color_shift[2];
      extra_noise = spot.speckle;
      px.dirt = true;
      break;
    }
  }
  const double sigma_px = spec.floor.noise_std + extra_noise;
  px.r = clamp_u8(r + rng.normal(0.0, sigma_px));
  px.g = clamp_u8(g + rng.normal(0.0, sigma_px));
  px.b = clamp_u8(b + rng.normal(0.0, sigma_px));
  return px;
}

// --- forward camera render ----------------------------------------------------

// camera axes in world coords: x_cam = -y_w, y_cam = -z_w, z_cam = +x_w
double ray_vertical_cylinder(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                             const Eigen::Vector2d& c, double radius, double z0, double z1) {
  const Eigen::Vector2d o2(o.x(), o.y());
  Eigen::Vector2d d2(d.x(), d.y());
  const double dn = d2.norm();
  if (dn < 1e-12) return -1.0;
  const double t2d = ray_circle(o2, d2 / dn, c, radius);
  if (t2d < 0.0) return -1.0;
  const double t = t2d / dn;
  const double z = o.z() + t * d.z();
  if (z < z0 || z > z1) return -1.0;
  return t;
}

}  // namespace

SyntheticScene generate_synthetic_scene(const SceneSpec& spec, uint64_t seed) {
  const int n_frames = static_cast<int>(std::llround(spec.duration * spec.rate));
  if (n_frames <= 0) throw std::invalid_argument("scene would have zero frames");

  // validate walker paths stay inside the arena over the whole run
  for (size_t w = 0; w < spec.walkers.size(); ++w) {
    const auto& wk = spec.walkers[w];
    for (int k = 0; k < n_frames; ++k) {
      const double t = k / spec.rate;
      const double x = wk.x0 + wk.vx * t;
      const double y = wk.y0 + wk.vy * t;
      if (std::abs(x) > spec.arena_half_x - wk.radius ||
          std::abs(y) > spec.arena_half_y - wk.radius) {
        throw std::invalid_argument("walker " + std::to_string(w) + " leaves the arena at t=" +
                                    std::to_string(t));
      }
    }
  }

  Rng rng(seed);
  SyntheticScene scene;
  auto& seq = scene.sequence;
  seq.manifest = SequenceManifest::with_default_sensors();
  {
    auto& floor_cam = seq.manifest.sensors[SensorId::rgbd_floor];
    floor_cam.intrinsics = Intrinsics{140.0, 140.0, (spec.camera_width - 1) / 2.0,
                                      (spec.camera_height - 1) / 2.0};
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    // x_cam = +x_w, y_cam = -y_w, z_cam = -z_w; mounted ahead of the base
    t.block<3, 3>(0, 0) << 1, 0, 0, 0, -1, 0, 0, 0, -1;
    t(0, 3) = kFloorCamForwardOffset;
    t(2, 3) = kFloorCamHeight;
    floor_cam.extrinsics = t;
    auto& fwd_cam = seq.manifest.sensors[SensorId::rgbd_forward];
    fwd_cam.intrinsics = floor_cam.intrinsics;
    Eigen::Matrix4d tf = Eigen::Matrix4d::Identity();
    // x_cam = -y_w, y_cam = -z_w, z_cam = +x_w
    tf.block<3, 3>(0, 0) << 0, 0, 1, -1, 0, 0, 0, -1, 0;
    tf(2, 3) = kForwardCamHeight;
    fwd_cam.extrinsics = tf;
  }

  scene.truth.trajectories.resize(spec.walkers.size());
  for (size_t w = 0; w < spec.walkers.size(); ++w) scene.truth.trajectories[w].walker = (int)w;

  const Intrinsics intr = *seq.manifest.sensors.at(SensorId::rgbd_floor).intrinsics;

  for (int k = 0; k < n_frames; ++k) {
    const double t = k / spec.rate;
    const double robot_x = spec.robot_speed * t;
    const double robot_y = 0.0;

    Pose2D pose{robot_x, robot_y, 0.0, t};
    seq.poses.push_back(pose);

    std::vector<WalkerState> walkers;
    for (const auto& wk : spec.walkers) {
      walkers.push_back({{wk.x0 + wk.vx * t, wk.y0 + wk.vy * t}, {wk.vx, wk.vy}, &wk});
    }

    // ground truth: trajectories + world-frame walker boxes
    GroundTruth::FrameBoxes fb;
    fb.timestamp = t;
    for (size_t w = 0; w < walkers.size(); ++w) {
      scene.truth.trajectories[w].poses.push_back(
          {walkers[w].pos.x(), walkers[w].pos.y(),
           std::atan2(walkers[w].vel.y(), walkers[w].vel.x()), t});
      BoundingBox3D box;
      box.center = {walkers[w].pos.x(), walkers[w].pos.y(), walkers[w].spec->height / 2};
      box.extents = {2 * walkers[w].spec->radius, 2 * walkers[w].spec->radius,
                     walkers[w].spec->height};
      fb.boxes.push_back(box);
    }
    scene.truth.walker_boxes.push_back(std::move(fb));

    if (spec.emit_lidar) {
      PointCloud3D cloud;
      cloud.timestamp = t;
      cloud.frame_id = FrameId::sensor;
      const Eigen::Vector3d sensor_origin(robot_x, robot_y, kLidarHeight);
      std::vector<Point3D> world_pts;
      // floor disc
      for (int i = 0; i < spec.lidar_ground_points; ++i) {
        const double rr = 8.0 * std::sqrt(rng.uniform());
        const double th = rng.uniform(0.0, 2.0 * M_PI);
        world_pts.push_back({static_cast<float>(robot_x + rr * std::cos(th)),
                             static_cast<float>(robot_y + rr * std::sin(th)),
                             static_cast<float>(rng.normal(0.0, 0.004)),
                             clip_intensity(rng.normal(80.0, 10.0))});
      }
      if (spec.walls) {
        for (int i = 0; i < spec.lidar_wall_points; ++i) {
          const int side = static_cast<int>(rng.uniform_index(4));
          const double along = rng.uniform(-1.0, 1.0);
          const double z = rng.uniform(0.0, 2.2);
          double x, y;
          if (side == 0) { x = spec.arena_half_x; y = along * spec.arena_half_y; }
          else if (side == 1) { x = -spec.arena_half_x; y = along * spec.arena_half_y; }
          else if (side == 2) { y = spec.arena_half_y; x = along * spec.arena_half_x; }
          else { y = -spec.arena_half_y; x = along * spec.arena_half_x; }
          world_pts.push_back({static_cast<float>(x + rng.normal(0.0, 0.004)),
                               static_cast<float>(y + rng.normal(0.0, 0.004)),
                               static_cast<float>(z), clip_intensity(rng.normal(100.0, 10.0))});
        }
      }
      for (const auto& ws : walkers) {
        sample_cylinder(rng, {ws.pos.x(), ws.pos.y(), 0.0}, ws.spec->radius, ws.spec->height,
                        spec.lidar_points_per_walker, ws.spec->intensity_mean,
                        ws.spec->intensity_std, &world_pts);
      }
      for (const auto& box : spec.boxes) {
        sample_box(rng, box, spec.lidar_points_per_box, &world_pts);
      }
      // world -> sensor frame (robot heading fixed at 0)
      cloud.points.reserve(world_pts.size());
      for (const auto& p : world_pts) {
        cloud.points.push_back({static_cast<float>(p.x - sensor_origin.x()),
                                static_cast<float>(p.y - sensor_origin.y()),
                                static_cast<float>(p.z - sensor_origin.z()), p.intensity});
      }
      FrameRecord rec;
      rec.sensor = SensorId::lidar3d;
      rec.timestamp = t;
      rec.cloud = std::move(cloud);
      seq.frames.push_back(std::move(rec));
    }

    if (spec.emit_laser) {
      LaserScan2D scan;
      scan.timestamp = t;
      scan.angle_min = -0.75 * M_PI;
      scan.angle_increment = (1.5 * M_PI) / 540.0;
      scan.range_max = 30.0;
      const Eigen::Vector2d origin(robot_x, robot_y);
      for (int b = 0; b <= 540; ++b) {
        const double a = scan.angle_min + b * scan.angle_increment;
        const Eigen::Vector2d dir(std::cos(a), std::sin(a));
        double best = scan.range_max;
        for (const auto& ws : walkers) {
          const Eigen::Vector2d off = ws.leg_offset();
          for (const Eigen::Vector2d& c : {Eigen::Vector2d(ws.pos + off), Eigen::Vector2d(ws.pos - off)}) {
            const double tt = ray_circle(origin, dir, c, ws.spec->leg_radius);
            if (tt > 0.0 && tt < best) best = tt;
          }
        }
        for (const auto& box : spec.boxes) {
          if (box.h < kLaserHeight) continue;
          const double tt = ray_rect(origin, dir, box.x, box.y, box.w, box.d);
          if (tt > 0.0 && tt < best) best = tt;
        }
        if (spec.walls) {
          const double hx = spec.arena_half_x, hy = spec.arena_half_y;
          const Eigen::Vector2d c00(-hx, -hy), c10(hx, -hy), c11(hx, hy), c01(-hx, hy);
          for (const auto& [p, q] :
               {std::pair{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}}) {
            const double tt = ray_segment(origin, dir, p, q);
            if (tt > 0.0 && tt < best) best = tt;
          }
        }
        if (best < scan.range_max) best += rng.normal(0.0, 0.004);
        scan.ranges.push_back(std::min(best, scan.range_max));
      }
      FrameRecord rec;
      rec.sensor = SensorId::laser2d;
      rec.timestamp = t;
      rec.scan = std::move(scan);
      seq.frames.push_back(std::move(rec));
    }

    if (spec.emit_floor_camera) {
      const int W = spec.camera_width, H = spec.camera_height;
      const double cam_x = robot_x + kFloorCamForwardOffset;
      const double cam_y = robot_y;
      DepthFrame depth;
      depth.width = W;
      depth.height = H;
      depth.intrinsics = intr;
      depth.timestamp = t;
      depth.depth.resize(static_cast<size_t>(W) * H);
      ColorFrame rgb;
      rgb.width = W;
      rgb.height = H;
      rgb.timestamp = t;
      rgb.rgb.resize(static_cast<size_t>(W) * H * 3);
      GroundTruth::DirtMask gt;
      gt.timestamp = t;
      gt.width = W;
      gt.height = H;
      gt.mask.assign(static_cast<size_t>(W) * H, 0);

      for (int v = 0; v < H; ++v) {
        for (int u = 0; u < W; ++u) {
          const double xw = cam_x + kFloorCamHeight * (u - intr.cx) / intr.fx;
          const double yw = cam_y - kFloorCamHeight * (v - intr.cy) / intr.fy;
          FloorPixel px = render_floor_pixel(spec, cam_x, cam_y, xw, yw, rng);
          const double sigma = 0.0012 + 0.0019 * (px.depth - 0.4) * (px.depth - 0.4);
          double d = px.depth;
          if (spec.depth_noise > 0.0) d += rng.normal(0.0, sigma * spec.depth_noise);
          depth.at(u, v) = static_cast<float>(std::max(0.0, d));
          uint8_t* out = rgb.pixel(u, v);
          out[0] = px.r;
          out[1] = px.g;
          out[2] = px.b;
          if (px.dirt) gt.mask[static_cast<size_t>(v) * W + u] = 255;
        }
      }
      scene.truth.dirt_masks.push_back(std::move(gt));
      FrameRecord rec;
      rec.sensor = SensorId::rgbd_floor;
      rec.timestamp = t;
      rec.depth = std::move(depth);
      rec.rgb = std::move(rgb);
      seq.frames.push_back(std::move(rec));
    }

    if (spec.emit_forward_camera) {
      const int W = spec.camera_width, H = spec.camera_height;
      const Eigen::Vector3d cam_pos(robot_x + 0.15, robot_y, kForwardCamHeight);
      DepthFrame depth;
      depth.width = W;
      depth.height = H;
      depth.intrinsics = intr;
      depth.timestamp = t;
      depth.depth.resize(static_cast<size_t>(W) * H);
      ColorFrame rgb;
      rgb.width = W;
      rgb.height = H;
      rgb.timestamp = t;
      rgb.rgb.resize(static_cast<size_t>(W) * H * 3);

      for (int v = 0; v < H; ++v) {
        for (int u = 0; u < W; ++u) {
          const Eigen::Vector3d dir_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
          const Eigen::Vector3d dir_w(dir_cam.z(), -dir_cam.x(), -dir_cam.y());
          double best_t = -1.0;
          const WalkerSpec* hit_walker = nullptr;
          for (const auto& ws : walkers) {
            const Eigen::Vector2d off = ws.leg_offset();
            const double torso_base = 0.8;
            for (const Eigen::Vector2d& c : {Eigen::Vector2d(ws.pos + off), Eigen::Vector2d(ws.pos - off)}) {
              const double tt =
                  ray_vertical_cylinder(cam_pos, dir_w, c, ws.spec->leg_radius, 0.0, torso_base);
              if (tt > 0 && (best_t < 0 || tt < best_t)) { best_t = tt; hit_walker = ws.spec; }
            }
            const double tt = ray_vertical_cylinder(cam_pos, dir_w, ws.pos, ws.spec->radius,
                                                    torso_base, ws.spec->height);
            if (tt > 0 && (best_t < 0 || tt < best_t)) { best_t = tt; hit_walker = ws.spec; }
          }
          // floor as background
          double floor_t = -1.0;
          if (dir_w.z() < -1e-9) floor_t = -cam_pos.z() / dir_w.z();
          double r = 0, g = 0, b = 0, depth_m = 0.0;
          if (best_t > 0 && (floor_t < 0 || best_t < floor_t) && best_t * dir_cam.z() < 8.0) {
            depth_m = best_t;  // dir_cam.z() == 1, so t equals the optical-axis depth
            r = hit_walker->color[0];
            g = hit_walker->color[1];
            b = hit_walker->color[2];
          } else if (floor_t > 0 && floor_t < 8.0) {
            depth_m = floor_t;
            r = spec.floor.base_color[0];
            g = spec.floor.base_color[1];
            b = spec.floor.base_color[2];
          }
          if (depth_m > 0.0) {
            const double sigma = 0.0012 + 0.0019 * (depth_m - 0.4) * (depth_m - 0.4);
            if (spec.depth_noise > 0.0) depth_m += rng.normal(0.0, sigma * spec.depth_noise);
          }
          depth.at(u, v) = static_cast<float>(std::max(0.0, depth_m));
          uint8_t* out = rgb.pixel(u, v);
          out[0] = clamp_u8(r + rng.normal(0.0, spec.floor.noise_std));
          out[1] = clamp_u8(g + rng.normal(0.0, spec.floor.noise_std));
          out[2] = clamp_u8(b + rng.normal(0.0, spec.floor.noise_std));
        }
      }
      FrameRecord rec;
      rec.sensor = SensorId::rgbd_forward;
      rec.timestamp = t;
      rec.depth = std::move(depth);
      rec.rgb = std::move(rgb);
      seq.frames.push_back(std::move(rec));
    }
  }

  return scene;
}

void save_scene(const SyntheticScene& scene, const std::string& directory) {
  save_sequence(scene.sequence, directory);

  json gt;
  gt["trajectories"] = json::array();
  for (const auto& tr : scene.truth.trajectories) {
    json poses = json::array();
    for (const auto& p : tr.poses) poses.push_back({p.timestamp, p.x, p.y, p.theta});
    gt["trajectories"].push_back({{"walker", tr.walker}, {"poses", poses}});
  }
  gt["walker_boxes"] = json::array();
  for (const auto& fb : scene.truth.walker_boxes) {
    json boxes = json::array();
    for (const auto& b : fb.boxes) {
      boxes.push_back({b.center.x(), b.center.y(), b.center.z(), b.extents.x(), b.extents.y(),
                       b.extents.z()});
    }
    gt["walker_boxes"].push_back({{"timestamp", fb.timestamp}, {"boxes", boxes}});
  }
  std::ofstream out(directory + "/gt.json");
  if (!out) throw std::runtime_error("cannot write gt.json: " + directory);
  out << gt.dump(2) << '\n';

  if (!scene.truth.dirt_masks.empty()) {
    fs::create_directories(directory + "/gt_dirt");
    char name[32];
    for (size_t i = 0; i < scene.truth.dirt_masks.size(); ++i) {
      const auto& m = scene.truth.dirt_masks[i];
      std::snprintf(name, sizeof(name), "/gt_dirt/%06zu.png", i);
      png::write_gray8(directory + name, m.width, m.height, m.mask);
    }
  }
}

GroundTruth load_ground_truth(const std::string& directory) {
  std::ifstream in(directory + "/gt.json");
  if (!in) throw std::runtime_error("missing gt.json: " + directory);
  json gt;
  in >> gt;
  GroundTruth truth;
  for (const auto& tj : gt.value("trajectories", json::array())) {
    GroundTruth::Trajectory tr;
    tr.walker = tj.at("walker").get<int>();
    for (const auto& pj : tj.at("poses")) {
      tr.poses.push_back({pj[1].get<double>(), pj[2].get<double>(), pj[3].get<double>(),
                          pj[0].get<double>()});
    }
    truth.trajectories.push_back(std::move(tr));
  }
  for (const auto& fj : gt.value("walker_boxes", json::array())) {
    GroundTruth::FrameBoxes fb;
    fb.timestamp = fj.at("timestamp").get<double>();
    for (const auto& bj : fj.at("boxes")) {
      BoundingBox3D b;
      b.center = {bj[0].get<double>(), bj[1].get<double>(), bj[2].get<double>()};
      b.extents = {bj[3].get<double>(), bj[4].get<double>(), bj[5].get<double>()};
      fb.boxes.push_back(b);
    }
    truth.walker_boxes.push_back(std::move(fb));
  }
  size_t i = 0;
  char name[32];
  while (true) {
    std::snprintf(name, sizeof(name), "/gt_dirt/%06zu.png", i);
    const std::string path = directory + name;
    if (!fs::exists(path)) break;
    GroundTruth::DirtMask m;
    png::read_gray8(path, &m.width, &m.height, &m.mask);
    truth.dirt_masks.push_back(std::move(m));
    ++i;
  }
  return truth;
}

std::vector<LabeledCloud> generate_training_clusters(int per_class, uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledCloud> out;
  auto place = [&](std::vector<Point3D>& pts, double range, double bearing, double base_z) {
    for (auto& p : pts) {
      p.x += static_cast<float>(range * std::cos(bearing));
      p.y += static_cast<float>(range * std::sin(bearing));
      p.z += static_cast<float>(base_z);
    }
  };

  for (int i = 0; i < per_class; ++i) {
    // positives: human-size cylinders, clothing-like reflectance
    LabeledCloud lc;
    lc.label = +1;
    const double range = rng.uniform(2.0, 12.0);
    const double bearing = rng.uniform(0.0, 2.0 * M_PI);
    const double radius = rng.uniform(0.18, 0.3);
    const double height = rng.uniform(1.4, 1.9);
    const int count = 60 + static_cast<int>(rng.uniform_index(180));
    sample_cylinder(rng, {0, 0, 0}, radius, height, count, rng.uniform(130.0, 190.0), 20.0,
                    &lc.cloud.points);
    place(lc.cloud.points, range, bearing, -kLidarHeight);
    out.push_back(std::move(lc));
  }
  for (int i = 0; i < per_class; ++i) {
    // negatives: boxes, thin poles, wall fragments
    LabeledCloud lc;
    lc.label = -1;
    const double range = rng.uniform(2.0, 12.0);
    const double bearing = rng.uniform(0.0, 2.0 * M_PI);
    const int kind = static_cast<int>(rng.uniform_index(3));
    if (kind == 0) {
      BoxSpec box;
      box.x = 0;
      box.y = 0;
      box.w = rng.uniform(0.3, 2.0);
      box.d = rng.uniform(0.3, 2.0);
      box.h = rng.uniform(0.2, 1.4);
      box.intensity_mean = rng.uniform(40.0, 90.0);
      const int count = 60 + static_cast<int>(rng.uniform_index(180));
      sample_box(rng, box, count, &lc.cloud.points);
    } else if (kind == 1) {
      const int count = 40 + static_cast<int>(rng.uniform_index(120));
      sample_cylinder(rng, {0, 0, 0}, rng.uniform(0.04, 0.12), rng.uniform(0.8, 2.2), count,
                      rng.uniform(60.0, 110.0), 10.0, &lc.cloud.points);
    } else {
      // planar fragment standing upright
      const int count = 80 + static_cast<int>(rng.uniform_index(160));
      const double w = rng.uniform(1.2, 3.0), h = rng.uniform(1.0, 2.4);
      for (int j = 0; j < count; ++j) {
        lc.cloud.points.push_back({static_cast<float>(rng.uniform(-w / 2, w / 2)),
                                   static_cast<float>(rng.normal(0.0, 0.01)),
                                   static_cast<float>(rng.uniform(0.0, h)),
                                   clip_intensity(rng.normal(100.0, 10.0))});
      }
    }
    place(lc.cloud.points, range, bearing, -kLidarHeight);
    out.push_back(std::move(lc));
  }
  return out;
}

std::vector<LabeledScan> generate_training_scans(int per_class, uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledScan> out;
  auto make_scan = [&](const std::vector<std::pair<Eigen::Vector2d, double>>& circles,
                       const std::vector<BoxSpec>& boxes) {
    LaserScan2D scan;
    scan.angle_min = -0.75 * M_PI;
    scan.angle_increment = (1.5 * M_PI) / 540.0;
    scan.range_max = 30.0;
    for (int b = 0; b <= 540; ++b) {
      const double a = scan.angle_min + b * scan.angle_increment;
      const Eigen::Vector2d dir(std::cos(a), std::sin(a));
      double best = scan.range_max;
      for (const auto& [c, r] : circles) {
        const double tt = ray_circle({0, 0}, dir, c, r);
        if (tt > 0 && tt < best) best = tt;
      }
      for (const auto& box : boxes) {
        const double tt = ray_rect({0, 0}, dir, box.x, box.y, box.w, box.d);
        if (tt > 0 && tt < best) best = tt;
      }
      if (best < scan.range_max) best += rng.normal(0.0, 0.004);
      scan.ranges.push_back(std::min(best, scan.range_max));
    }
    return scan;
  };

  for (int i = 0; i < per_class; ++i) {
    const int pairs = 1 + static_cast<int>(rng.uniform_index(2));
    std::vector<std::pair<Eigen::Vector2d, double>> circles;
    for (int p = 0; p < pairs; ++p) {
      const double range = rng.uniform(0.8, 5.0);
      const double bearing = rng.uniform(-1.8, 1.8);
      const Eigen::Vector2d center(range * std::cos(bearing), range * std::sin(bearing));
      const Eigen::Vector2d perp(-std::sin(bearing), std::cos(bearing));
      const double sep = rng.uniform(0.2, 0.4);
      const double r = rng.uniform(0.05, 0.09);
      circles.push_back({center + perp * (sep / 2), r});
      circles.push_back({center - perp * (sep / 2), r});
    }
    out.push_back({make_scan(circles, {}), +1});
  }
  for (int i = 0; i < per_class; ++i) {
    std::vector<BoxSpec> boxes;
    const int n = 1 + static_cast<int>(rng.uniform_index(3));
    for (int b = 0; b < n; ++b) {
      BoxSpec box;
      const double range = rng.uniform(0.8, 6.0);
      const double bearing = rng.uniform(-1.8, 1.8);
      box.x = range * std::cos(bearing);
      box.y = range * std::sin(bearing);
      box.w = rng.uniform(0.3, 2.0);
      box.d = rng.uniform(0.3, 2.0);
      boxes.push_back(box);
    }
    out.push_back({make_scan({}, boxes), -1});
  }
  return out;
}

}  // namespace scrubber
