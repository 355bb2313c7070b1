#ifndef SCRUBBER_SYNTHETIC_HPP
#define SCRUBBER_SYNTHETIC_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "scrubber/sequence.hpp"

namespace scrubber {

/// Constant-velocity pedestrian proxy: a 0.5 x 0.5 x 1.7 m cylinder in the
/// lidar view, two leg circles at 2D-laser height, legs + torso in the
/// forward camera view.
struct WalkerSpec {
  double x0 = 0.0, y0 = 0.0;   // start, world frame
  double vx = 0.0, vy = 0.0;   // m/s
  double radius = 0.25;        // body cylinder radius
  double height = 1.7;
  double leg_radius = 0.07;
  double leg_separation = 0.26;  // center-to-center
  std::array<uint8_t, 3> color = {90, 90, 160};
  double intensity_mean = 160.0;  // lidar reflectance of clothing
  double intensity_std = 20.0;
};

/// Static clutter box resting on the floor.
struct BoxSpec {
  double x = 0.0, y = 0.0;  // footprint center
  double w = 0.5, d = 0.5, h = 0.5;
  double intensity_mean = 60.0;
};

struct DirtSpotSpec {
  double x = 0.0, y = 0.0;  // world floor position
  double radius = 0.08;
  std::array<int, 3> color_shift = {-45, -40, -25};  // applied to the floor color
  double speckle = 12.0;  // extra per-pixel noise inside the spot (spill texture)
};

struct FloorPattern {
  std::array<uint8_t, 3> base_color = {142, 138, 130};
  double noise_std = 1.5;    // per-pixel texture noise
  double tile_size = 0.5;    // 0 disables tile seams
  int tile_darken = 12;
};

struct SceneSpec {
  double arena_half_x = 8.0;
  double arena_half_y = 8.0;
  std::vector<WalkerSpec> walkers;
  std::vector<BoxSpec> boxes;
  std::vector<DirtSpotSpec> dirt_spots;
  FloorPattern floor;
  double duration = 5.0;  // seconds
  double rate = 10.0;     // Hz
  // robot drives +x at this speed from the origin (0 = parked)
  double robot_speed = 0.0;
  bool walls = true;
  bool emit_lidar = true;
  bool emit_laser = true;
  bool emit_floor_camera = true;
  bool emit_forward_camera = false;
  int camera_width = 160;
  int camera_height = 120;
  int lidar_ground_points = 500;
  int lidar_wall_points = 400;
  int lidar_points_per_walker = 150;
  int lidar_points_per_box = 80;
  double depth_noise = 1.0;  // multiplier on the floor-camera noise model
};

/// Everything the generator knows to be true about the scene.
struct GroundTruth {
  struct Trajectory {
    int walker = 0;
    std::vector<Pose2D> poses;  // one per frame tick
  };
  struct FrameBoxes {
    double timestamp = 0.0;
    std::vector<BoundingBox3D> boxes;  // world frame, one per walker
  };
  std::vector<Trajectory> trajectories;
  std::vector<FrameBoxes> walker_boxes;
  // dirt ground truth per floor-camera frame, 255 = dirt, row-major
  struct DirtMask {
    double timestamp = 0.0;
    int width = 0, height = 0;
    std::vector<uint8_t> mask;
  };
  std::vector<DirtMask> dirt_masks;
};

struct SyntheticScene {
  SequenceData sequence;
  GroundTruth truth;
};

/// Deterministic given (spec, seed). Throws if a walker path leaves the
/// arena or zero frames are requested.
SyntheticScene generate_synthetic_scene(const SceneSpec& spec, uint64_t seed);

/// Writes sequence + gt.json + gt_dirt/*.png under directory.
void save_scene(const SyntheticScene& scene, const std::string& directory);
GroundTruth load_ground_truth(const std::string& directory);

/// Labeled single-cluster clouds for SVM training: cylindrical human proxies
/// (label +1) vs boxes/plane fragments/poles (label -1), desk scale.
struct LabeledCloud {
  PointCloud3D cloud;
  int label = 0;  // +1 human, -1 background
};
std::vector<LabeledCloud> generate_training_clusters(int per_class, uint64_t seed);

/// Labeled scans for the 2D leg classifier: leg-pair scans (positive
/// segments) vs clutter scans of boxes and wall stretches (negative).
struct LabeledScan {
  LaserScan2D scan;
  int label = 0;
};
std::vector<LabeledScan> generate_training_scans(int per_class, uint64_t seed);

}  // namespace scrubber

#endif
