#ifndef SCRUBBER_DIRT_HPP
#define SCRUBBER_DIRT_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "scrubber/frames.hpp"
#include "scrubber/geometry.hpp"

namespace scrubber {

/// Planar float image, 3 channels (Lab here).
struct FloatImage3 {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // 3 * width * height, interleaved

  const float* pixel(int u, int v) const { return &data[3 * (static_cast<size_t>(v) * width + u)]; }
  float* pixel(int u, int v) { return &data[3 * (static_cast<size_t>(v) * width + u)]; }
};

/// Standard sRGB (D65) to CIE Lab. L in [0, 100], a/b around [-128, 127].
FloatImage3 rgb_to_lab(const ColorFrame& frame);

/// Per-block, per-channel (mean, std) of the gradient magnitude.
struct BlockGrid {
  int block_size = 16;
  int cols = 0;
  int rows = 0;
  struct BlockStats {
    bool valid = false;
    // [channel][0] = mean, [channel][1] = std of |gradient|
    double mean[3] = {0, 0, 0};
    double stddev[3] = {0, 0, 0};
  };
  std::vector<BlockStats> blocks;  // row-major

  const BlockStats& at(int c, int r) const { return blocks[static_cast<size_t>(r) * cols + c]; }
  BlockStats& at(int c, int r) { return blocks[static_cast<size_t>(r) * cols + c]; }
};

/// Gradient magnitude via clamped central differences, blocked statistics.
/// A block is valid iff fully inside the floor mask and disjoint from the
/// object mask (and the optional extra discard mask). Masks: nonzero =
/// member. Incomplete edge blocks are discarded.
BlockGrid gradient_blocks(const FloatImage3& lab, const std::vector<uint8_t>& floor_mask,
                          const std::vector<uint8_t>& object_mask, int block_size = 16,
                          const std::vector<uint8_t>* extra_discard = nullptr);

/// 2D Gaussian mixture fitted by EM (seeded k-means++ init, covariance floor
/// each M-step). Weights sum to 1; covariances stay positive definite.
struct GmmModel {
  struct Component {
    double weight = 0.0;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Identity();
  };
  std::vector<Component> components;

  double log_likelihood(const Eigen::Vector2d& x) const;
};

struct GmmFitInfo {
  std::vector<double> log_likelihood_per_iteration;  // monotone non-decreasing
  int iterations = 0;
};

GmmModel fit_gmm(const std::vector<Eigen::Vector2d>& samples, int components, uint64_t seed,
                 GmmFitInfo* info = nullptr, int max_iterations = 200,
                 double rel_tolerance = 1e-5, double covariance_floor = 1e-6);

constexpr double kInvalidScore = std::numeric_limits<double>::quiet_NaN();

/// Per-block mixed log-likelihood: sum over the three channels of
/// log p((mean, std) | channel GMM). Invalid blocks get NaN.
std::vector<double> score_blocks(const BlockGrid& grid, const std::array<GmmModel, 3>& models);

/// Fits one GMM per channel on the valid blocks of this frame.
std::array<GmmModel, 3> fit_block_models(const BlockGrid& grid, int components, uint64_t seed);

struct DirtThreshold {
  bool percentile_mode = true;
  double percentile = 5.0;   // of valid-block scores
  double absolute = -50.0;   // used when percentile_mode == false
};

/// Block mask: true where score < threshold. Degenerate all-equal score sets
/// yield an empty mask (no novelty to detect). NaN scores never flag.
std::vector<uint8_t> dirt_mask(const std::vector<double>& scores, const DirtThreshold& threshold);

/// Expands a block mask to pixel resolution (255 = dirt).
std::vector<uint8_t> expand_block_mask(const std::vector<uint8_t>& block_mask, int cols, int rows,
                                       int block_size, int width, int height);

/// Per-world-cell temporal median over the last `window` observations.
/// Observations are (cell, dirt) pairs registered by the caller.
class TemporalMedianFilter {
 public:
  explicit TemporalMedianFilter(int window = 5);

  struct CellKey {
    int64_t x, y;
    bool operator<(const CellKey& o) const { return std::tie(x, y) < std::tie(o.x, o.y); }
  };
  static CellKey cell_of(double x, double y, double cell_size) {
    return {static_cast<int64_t>(std::floor(x / cell_size)),
            static_cast<int64_t>(std::floor(y / cell_size))};
  }

  /// Pushes one frame's observations; returns the filtered value per
  /// observed cell (median of that cell's buffered observations).
  std::vector<std::pair<CellKey, bool>> push(const std::vector<std::pair<CellKey, bool>>& obs);

  int window() const { return window_; }

 private:
  int window_;
  std::map<CellKey, std::deque<uint8_t>> buffers_;
};

}  // namespace scrubber

#endif
