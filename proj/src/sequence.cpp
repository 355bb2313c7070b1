#include "scrubber/sequence.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "scrubber/png_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace scrubber {

static_assert(sizeof(Point3D) == 16, "cloud codec relies on packed x,y,z,intensity floats");

namespace {

constexpr char kCloudMagic[4] = {'F', 'P', 'C', '1'};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error(what + ": " + path);
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    return v;
  } catch (const std::exception&) {
    fail(path, "malformed numeric field '" + s + "'");
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

json matrix_to_json(const Eigen::Matrix4d& m) {
  json a = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a.push_back(m(r, c));
  return a;
}

Eigen::Matrix4d matrix_from_json(const json& a) {
  if (!a.is_array() || a.size() != 16) throw std::runtime_error("extrinsics must be 16 numbers");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = a[4 * r + c].get<double>();
  return m;
}

}  // namespace

const char* to_string(SensorId s) {
  switch (s) {
    case SensorId::lidar3d: return "lidar3d";
    case SensorId::rgbd_forward: return "rgbd_forward";
    case SensorId::rgbd_floor: return "rgbd_floor";
    case SensorId::laser2d: return "laser2d";
  }
  return "unknown";
}

SensorId sensor_id_from_string(const std::string& s) {
  if (s == "lidar3d") return SensorId::lidar3d;
  if (s == "rgbd_forward") return SensorId::rgbd_forward;
  if (s == "rgbd_floor") return SensorId::rgbd_floor;
  if (s == "laser2d") return SensorId::laser2d;
  throw std::runtime_error("unknown sensor id: " + s);
}

SequenceManifest SequenceManifest::with_default_sensors() {
  SequenceManifest m;
  auto lift = [](double h) {
    Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
    t(2, 3) = h;
    return t;
  };
  m.sensors[SensorId::lidar3d] = {lift(0.8), 0.8, std::nullopt};
  m.sensors[SensorId::rgbd_forward] = {lift(0.55), 0.55, Intrinsics{140, 140, 79.5, 59.5}};
  m.sensors[SensorId::rgbd_floor] = {lift(0.72), 0.72, Intrinsics{140, 140, 79.5, 59.5}};
  m.sensors[SensorId::laser2d] = {lift(0.119), 0.119, std::nullopt};
  return m;
}

// --- binary cloud codec -----------------------------------------------------

PointCloud3D read_cloud_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "missing cloud file");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCloudMagic, 4) != 0) fail(path, "bad cloud magic");
  uint32_t count = 0;
  in.read(reinterpret_cast<char*>(&count), 4);
  if (!in) fail(path, "truncated cloud header");
  PointCloud3D cloud;
  cloud.points.resize(count);
  in.read(reinterpret_cast<char*>(cloud.points.data()),
          static_cast<std::streamsize>(sizeof(Point3D)) * count);
  if (!in) fail(path, "truncated cloud payload");
  return cloud;
}

void write_cloud_bin(const std::string& path, const PointCloud3D& cloud) {
  for (const auto& p : cloud.points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.intensity)) {
      fail(path, "non-finite point in cloud");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot write cloud file");
  out.write(kCloudMagic, 4);
  const uint32_t count = static_cast<uint32_t>(cloud.points.size());
  out.write(reinterpret_cast<const char*>(&count), 4);
  out.write(reinterpret_cast<const char*>(cloud.points.data()),
            static_cast<std::streamsize>(sizeof(Point3D)) * count);
  if (!out) fail(path, "short write on cloud file");
}

// --- depth / rgb ------------------------------------------------------------

DepthFrame read_depth_png(const std::string& path, const Intrinsics& intrinsics) {
  std::vector<uint16_t> mm;
  DepthFrame f;
  png::read_gray16(path, &f.width, &f.height, &mm);
  f.intrinsics = intrinsics;
  f.depth.resize(mm.size());
  for (size_t i = 0; i < mm.size(); ++i) f.depth[i] = static_cast<float>(mm[i]) * 0.001f;
  return f;
}

void write_depth_png(const std::string& path, const DepthFrame& frame) {
  std::vector<uint16_t> mm(frame.depth.size());
  for (size_t i = 0; i < frame.depth.size(); ++i) {
    const float d = frame.depth[i];
    if (!std::isfinite(d) || d < 0.0f) fail(path, "invalid depth value");
    const long v = std::lround(static_cast<double>(d) * 1000.0);
    mm[i] = static_cast<uint16_t>(std::clamp(v, 0L, 65535L));
  }
  png::write_gray16(path, frame.width, frame.height, mm);
}

ColorFrame read_rgb_png(const std::string& path) {
  ColorFrame f;
  png::read_rgb8(path, &f.width, &f.height, &f.rgb);
  return f;
}

void write_rgb_png(const std::string& path, const ColorFrame& frame) {
  png::write_rgb8(path, frame.width, frame.height, frame.rgb);
}

// --- scan / poses csv -------------------------------------------------------

LaserScan2D read_scan_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "missing scan file");
  std::string line;
  if (!std::getline(in, line)) fail(path, "empty scan file");
  const auto head = split_csv_line(line);
  if (head.size() != 3) fail(path, "scan header must be angle_min,angle_increment,range_max");
  LaserScan2D scan;
  scan.angle_min = parse_double(head[0], path);
  scan.angle_increment = parse_double(head[1], path);
  scan.range_max = parse_double(head[2], path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    scan.ranges.push_back(parse_double(line, path));
  }
  if (scan.ranges.size() < 2) fail(path, "scan needs at least 2 ranges");
  if (scan.angle_increment <= 0.0) fail(path, "scan angle_increment must be positive");
  return scan;
}

void write_scan_csv(const std::string& path, const LaserScan2D& scan) {
  if (scan.ranges.size() < 2) fail(path, "scan needs at least 2 ranges");
  for (double r : scan.ranges) {
    if (!std::isfinite(r)) fail(path, "non-finite range");
  }
  std::ofstream out(path);
  if (!out) fail(path, "cannot write scan file");
  out << fmt_double(scan.angle_min) << ',' << fmt_double(scan.angle_increment) << ','
      << fmt_double(scan.range_max) << '\n';
  for (double r : scan.ranges) out << fmt_double(r) << '\n';
}

std::vector<Pose2D> read_poses_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "missing poses file");
  std::vector<Pose2D> poses;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first && line.rfind("timestamp", 0) == 0) {
      first = false;
      continue;  // header
    }
    first = false;
    const auto f = split_csv_line(line);
    if (f.size() != 4) fail(path, "pose rows are timestamp,x,y,theta");
    Pose2D p;
    p.timestamp = parse_double(f[0], path);
    p.x = parse_double(f[1], path);
    p.y = parse_double(f[2], path);
    p.theta = parse_double(f[3], path);
    poses.push_back(p);
  }
  return poses;
}

void write_poses_csv(const std::string& path, const std::vector<Pose2D>& poses) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot write poses file");
  out << "timestamp,x,y,theta\n";
  for (const auto& p : poses) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta)) {
      fail(path, "non-finite pose");
    }
    out << fmt_double(p.timestamp) << ',' << fmt_double(p.x) << ',' << fmt_double(p.y) << ','
        << fmt_double(p.theta) << '\n';
  }
}

// --- manifest ---------------------------------------------------------------

namespace {

SequenceManifest read_manifest(const std::string& dir) {
  const std::string path = dir + "/manifest.json";
  std::ifstream in(path);
  if (!in) fail(path, "missing manifest");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(path, std::string("malformed manifest: ") + e.what());
  }

  SequenceManifest m;
  for (auto& [name, sj] : j.at("sensors").items()) {
    SensorInfo info;
    info.extrinsics = matrix_from_json(sj.at("extrinsics"));
    info.height = sj.at("height").get<double>();
    if (std::abs(info.extrinsics.determinant()) < 1e-12) {
      fail(path, "non-invertible extrinsics for sensor " + name);
    }
    if (sj.contains("intrinsics")) {
      const auto& ij = sj["intrinsics"];
      Intrinsics intr{ij.at("fx").get<double>(), ij.at("fy").get<double>(),
                      ij.at("cx").get<double>(), ij.at("cy").get<double>()};
      if (intr.fx <= 0 || intr.fy <= 0) fail(path, "intrinsics must be positive");
      info.intrinsics = intr;
    }
    m.sensors[sensor_id_from_string(name)] = info;
  }

  double prev_ts = -std::numeric_limits<double>::infinity();
  for (const auto& fj : j.at("frames")) {
    SequenceManifest::FrameEntry e;
    e.sensor = sensor_id_from_string(fj.at("sensor").get<std::string>());
    e.timestamp = fj.at("timestamp").get<double>();
    e.cloud = fj.value("cloud", "");
    e.depth = fj.value("depth", "");
    e.rgb = fj.value("rgb", "");
    e.scan = fj.value("scan", "");
    const std::string frame_file =
        !e.cloud.empty() ? e.cloud : (!e.depth.empty() ? e.depth : (!e.rgb.empty() ? e.rgb : e.scan));
    if (e.timestamp < prev_ts) {
      fail(dir + "/" + frame_file, "timestamp regression in frame index");
    }
    prev_ts = e.timestamp;
    for (const std::string& rel : {e.cloud, e.depth, e.rgb, e.scan}) {
      if (!rel.empty() && !fs::exists(dir + "/" + rel)) {
        fail(dir + "/" + rel, "manifest references missing file");
      }
    }
    m.frames.push_back(std::move(e));
  }
  return m;
}

FrameRecord decode_frame(const std::string& dir, const SequenceManifest& manifest,
                         const SequenceManifest::FrameEntry& e) {
  FrameRecord rec;
  rec.sensor = e.sensor;
  rec.timestamp = e.timestamp;
  if (!e.cloud.empty()) {
    auto cloud = read_cloud_bin(dir + "/" + e.cloud);
    cloud.timestamp = e.timestamp;
    rec.cloud = std::move(cloud);
  }
  if (!e.depth.empty()) {
    Intrinsics intr;
    auto it = manifest.sensors.find(e.sensor);
    if (it != manifest.sensors.end() && it->second.intrinsics) intr = *it->second.intrinsics;
    auto depth = read_depth_png(dir + "/" + e.depth, intr);
    depth.timestamp = e.timestamp;
    rec.depth = std::move(depth);
  }
  if (!e.rgb.empty()) {
    auto rgb = read_rgb_png(dir + "/" + e.rgb);
    rgb.timestamp = e.timestamp;
    rec.rgb = std::move(rgb);
  }
  if (!e.scan.empty()) {
    auto scan = read_scan_csv(dir + "/" + e.scan);
    scan.timestamp = e.timestamp;
    rec.scan = std::move(scan);
  }
  return rec;
}

}  // namespace

SequenceReader::SequenceReader(const std::string& directory) : dir_(directory) {
  manifest_ = read_manifest(dir_);
  if (fs::exists(dir_ + "/poses.csv")) poses_ = read_poses_csv(dir_ + "/poses.csv");
}

Pose2D SequenceReader::pose_at(double t) const {
  if (poses_.empty()) return {};
  Pose2D best = poses_.front();
  for (const auto& p : poses_) {
    if (p.timestamp <= t) best = p;
    else break;
  }
  return best;
}

std::optional<FrameRecord> SequenceReader::next() {
  if (cursor_ >= manifest_.frames.size()) return std::nullopt;
  return decode_frame(dir_, manifest_, manifest_.frames[cursor_++]);
}

SequenceData load_sequence(const std::string& directory) {
  SequenceReader reader(directory);
  SequenceData data;
  data.manifest = reader.manifest();
  data.poses = reader.poses();
  while (auto f = reader.next()) data.frames.push_back(std::move(*f));
  return data;
}

void save_sequence(const SequenceData& data, const std::string& directory) {
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& f : data.frames) {
    if (f.timestamp < prev) throw std::runtime_error("save_sequence: frames not timestamp-ordered");
    prev = f.timestamp;
  }

  std::error_code ec;
  fs::create_directories(directory, ec);
  for (const char* sub : {"clouds", "depth", "rgb", "scan"}) {
    fs::create_directories(directory + "/" + sub, ec);
  }
  if (!fs::exists(directory)) fail(directory, "cannot create sequence directory");

  json sensors = json::object();
  for (const auto& [id, info] : data.manifest.sensors) {
    json sj;
    sj["extrinsics"] = matrix_to_json(info.extrinsics);
    sj["height"] = info.height;
    if (info.intrinsics) {
      sj["intrinsics"] = {{"fx", info.intrinsics->fx},
                          {"fy", info.intrinsics->fy},
                          {"cx", info.intrinsics->cx},
                          {"cy", info.intrinsics->cy}};
    }
    sensors[to_string(id)] = sj;
  }

  json frames = json::array();
  std::map<SensorId, int> counters;
  char name[32];
  for (const auto& f : data.frames) {
    const int n = counters[f.sensor]++;
    json fj;
    fj["sensor"] = to_string(f.sensor);
    fj["timestamp"] = f.timestamp;
    if (f.cloud) {
      std::snprintf(name, sizeof(name), "clouds/%06d.bin", n);
      write_cloud_bin(directory + "/" + name, *f.cloud);
      fj["cloud"] = name;
    }
    if (f.depth) {
      std::snprintf(name, sizeof(name), "depth/%06d.png", n);
      write_depth_png(directory + "/" + name, *f.depth);
      fj["depth"] = name;
    }
    if (f.rgb) {
      std::snprintf(name, sizeof(name), "rgb/%06d.png", n);
      write_rgb_png(directory + "/" + name, *f.rgb);
      fj["rgb"] = name;
    }
    if (f.scan) {
      std::snprintf(name, sizeof(name), "scan/%06d.csv", n);
      write_scan_csv(directory + "/" + name, *f.scan);
      fj["scan"] = name;
    }
    frames.push_back(std::move(fj));
  }

  json manifest;
  manifest["sensors"] = std::move(sensors);
  manifest["frames"] = std::move(frames);
  std::ofstream out(directory + "/manifest.json");
  if (!out) fail(directory + "/manifest.json", "cannot write manifest");
  out << manifest.dump(2) << '\n';

  write_poses_csv(directory + "/poses.csv", data.poses);
}

}  // namespace scrubber
