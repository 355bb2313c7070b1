#include "scrubber/dirt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scrubber/rng.hpp"

namespace scrubber {

namespace {

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t)
                                   : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

FloatImage3 rgb_to_lab(const ColorFrame& frame) {
  FloatImage3 out;
  out.width = frame.width;
  out.height = frame.height;
  out.data.resize(static_cast<size_t>(frame.width) * frame.height * 3);
  // D65 reference white
  constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;
  for (size_t i = 0; i < frame.rgb.size(); i += 3) {
    const double r = srgb_to_linear(frame.rgb[i] / 255.0);
    const double g = srgb_to_linear(frame.rgb[i + 1] / 255.0);
    const double b = srgb_to_linear(frame.rgb[i + 2] / 255.0);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / xn), fy = lab_f(y / yn), fz = lab_f(z / zn);
    out.data[i] = static_cast<float>(116.0 * fy - 16.0);
    out.data[i + 1] = static_cast<float>(500.0 * (fx - fy));
    out.data[i + 2] = static_cast<float>(200.0 * (fy - fz));
  }
  return out;
}

BlockGrid gradient_blocks(const FloatImage3& lab, const std::vector<uint8_t>& floor_mask,
                          const std::vector<uint8_t>& object_mask, int block_size,
                          const std::vector<uint8_t>* extra_discard) {
  const int w = lab.width, h = lab.height;
  const size_t npx = static_cast<size_t>(w) * h;
  if (floor_mask.size() != npx || object_mask.size() != npx) {
    throw std::invalid_argument("gradient_blocks: mask dimensions differ from image");
  }
  if (extra_discard && extra_discard->size() != npx) {
    throw std::invalid_argument("gradient_blocks: extra mask dimensions differ from image");
  }

  // |gradient| per channel via clamped central differences
  std::vector<float> grad(npx * 3);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int ul = std::max(u - 1, 0), ur = std::min(u + 1, w - 1);
      const int vt = std::max(v - 1, 0), vb = std::min(v + 1, h - 1);
      const double du = ur - ul, dv = vb - vt;
      for (int c = 0; c < 3; ++c) {
        const double gx = du > 0 ? (lab.pixel(ur, v)[c] - lab.pixel(ul, v)[c]) / du : 0.0;
        const double gy = dv > 0 ? (lab.pixel(u, vb)[c] - lab.pixel(u, vt)[c]) / dv : 0.0;
        grad[3 * (static_cast<size_t>(v) * w + u) + c] =
            static_cast<float>(std::sqrt(gx * gx + gy * gy));
      }
    }
  }

  BlockGrid grid;
  grid.block_size = block_size;
  grid.cols = w / block_size;
  grid.rows = h / block_size;
  grid.blocks.assign(static_cast<size_t>(grid.cols) * grid.rows, {});

  for (int br = 0; br < grid.rows; ++br) {
    for (int bc = 0; bc < grid.cols; ++bc) {
      auto& blk = grid.at(bc, br);
      bool ok = true;
      double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
      for (int dv = 0; dv < block_size && ok; ++dv) {
        for (int du = 0; du < block_size && ok; ++du) {
          const int u = bc * block_size + du, v = br * block_size + dv;
          const size_t idx = static_cast<size_t>(v) * w + u;
          if (!floor_mask[idx] || object_mask[idx] || (extra_discard && (*extra_discard)[idx])) {
            ok = false;
            break;
          }
          for (int c = 0; c < 3; ++c) {
            const double g = grad[3 * idx + c];
            sum[c] += g;
            sq[c] += g * g;
          }
        }
      }
      if (!ok) continue;
      const double n = static_cast<double>(block_size) * block_size;
      blk.valid = true;
      for (int c = 0; c < 3; ++c) {
        blk.mean[c] = sum[c] / n;
        blk.stddev[c] = std::sqrt(std::max(sq[c] / n - blk.mean[c] * blk.mean[c], 0.0));
      }
    }
  }
  return grid;
}

double GmmModel::log_likelihood(const Eigen::Vector2d& x) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(components.size());
  for (size_t k = 0; k < components.size(); ++k) {
    const auto& c = components[k];
    Eigen::LLT<Eigen::Matrix2d> llt(c.covariance);
    const Eigen::Vector2d d = x - c.mean;
    const double maha = d.dot(llt.solve(d));
    const Eigen::Matrix2d l = llt.matrixL();
    const double log_det = 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)));
    terms[k] = std::log(std::max(c.weight, 1e-300)) -
               0.5 * (maha + log_det + 2.0 * std::log(2.0 * M_PI));
    best = std::max(best, terms[k]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - best);
  return best + std::log(acc);
}

GmmModel fit_gmm(const std::vector<Eigen::Vector2d>& samples, int components, uint64_t seed,
                 GmmFitInfo* info, int max_iterations, double rel_tolerance,
                 double covariance_floor) {
  if (components < 1) throw std::invalid_argument("fit_gmm: K must be >= 1");
  const size_t n = samples.size();
  if (n < static_cast<size_t>(components)) {
    throw std::invalid_argument("fit_gmm: fewer samples than components");
  }

  Rng rng(seed);
  GmmModel model;
  model.components.resize(components);

  // k-means++ seeding
  std::vector<Eigen::Vector2d> centers;
  centers.push_back(samples[rng.uniform_index(n)]);
  std::vector<double> d2(n);
  while (centers.size() < static_cast<size_t>(components)) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centers) best = std::min(best, (samples[i] - c).squaredNorm());
      d2[i] = best;
      total += best;
    }
    size_t pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.uniform_index(n);  // all samples identical
    }
    centers.push_back(samples[pick]);
  }

  // init: equal weights, seeded means, pooled covariance
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(n);
  Eigen::Matrix2d pooled = Eigen::Matrix2d::Zero();
  for (const auto& s : samples) pooled += (s - mean) * (s - mean).transpose();
  pooled /= static_cast<double>(n);
  pooled += covariance_floor * Eigen::Matrix2d::Identity();

  for (int k = 0; k < components; ++k) {
    model.components[k].weight = 1.0 / components;
    model.components[k].mean = centers[k];
    model.components[k].covariance = pooled;
  }

  std::vector<std::vector<double>> resp(n, std::vector<double>(components));
  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iterations; ++iter) {
    // E step
    double ll = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      std::vector<double> logp(components);
      for (int k = 0; k < components; ++k) {
        const auto& c = model.components[k];
        Eigen::LLT<Eigen::Matrix2d> llt(c.covariance);
        const Eigen::Vector2d d = samples[i] - c.mean;
        const double maha = d.dot(llt.solve(d));
        const Eigen::Matrix2d l = llt.matrixL();
        const double log_det = 2.0 * (std::log(l(0, 0)) + std::log(l(1, 1)));
        logp[k] = std::log(std::max(c.weight, 1e-300)) -
                  0.5 * (maha + log_det + 2.0 * std::log(2.0 * M_PI));
        best = std::max(best, logp[k]);
      }
      double denom = 0.0;
      for (int k = 0; k < components; ++k) denom += std::exp(logp[k] - best);
      for (int k = 0; k < components; ++k) resp[i][k] = std::exp(logp[k] - best) / denom;
      ll += best + std::log(denom);
    }
    if (info) {
      info->log_likelihood_per_iteration.push_back(ll);
      info->iterations = iter + 1;
    }

    // M step with covariance flooring
    for (int k = 0; k < components; ++k) {
      double nk = 0.0;
      Eigen::Vector2d mu = Eigen::Vector2d::Zero();
      for (size_t i = 0; i < n; ++i) {
        nk += resp[i][k];
        mu += resp[i][k] * samples[i];
      }
      if (nk < 1e-12) {
        // dead component: re-seed at the worst-explained sample
        model.components[k].weight = 1e-12;
        continue;
      }
      mu /= nk;
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d d = samples[i] - mu;
        cov += resp[i][k] * d * d.transpose();
      }
      cov /= nk;
      cov += covariance_floor * Eigen::Matrix2d::Identity();
      model.components[k].weight = nk / static_cast<double>(n);
      model.components[k].mean = mu;
      model.components[k].covariance = cov;
    }
    // renormalize weights (dead components keep epsilon mass)
    double wsum = 0.0;
    for (const auto& c : model.components) wsum += c.weight;
    for (auto& c : model.components) c.weight /= wsum;

    if (iter > 0) {
      const double rel = std::abs(ll - prev_ll) / std::max(std::abs(prev_ll), 1e-12);
      if (rel < rel_tolerance) break;
    }
    prev_ll = ll;
  }
  return model;
}

std::array<GmmModel, 3> fit_block_models(const BlockGrid& grid, int components, uint64_t seed) {
  std::array<GmmModel, 3> models;
  for (int c = 0; c < 3; ++c) {
    std::vector<Eigen::Vector2d> samples;
    for (const auto& blk : grid.blocks) {
      if (blk.valid) samples.push_back({blk.mean[c], blk.stddev[c]});
    }
    models[c] = fit_gmm(samples, components, seed + static_cast<uint64_t>(c));
  }
  return models;
}

std::vector<double> score_blocks(const BlockGrid& grid, const std::array<GmmModel, 3>& models) {
  std::vector<double> scores(grid.blocks.size(), kInvalidScore);
  for (size_t i = 0; i < grid.blocks.size(); ++i) {
    const auto& blk = grid.blocks[i];
    if (!blk.valid) continue;
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      s += models[c].log_likelihood({blk.mean[c], blk.stddev[c]});
    }
    scores[i] = s;
  }
  return scores;
}

std::vector<uint8_t> dirt_mask(const std::vector<double>& scores, const DirtThreshold& threshold) {
  std::vector<uint8_t> mask(scores.size(), 0);
  std::vector<double> valid;
  for (double s : scores) {
    if (!std::isnan(s)) valid.push_back(s);
  }
  if (valid.empty()) return mask;

  double cut;
  if (threshold.percentile_mode) {
    std::sort(valid.begin(), valid.end());
    // degenerate all-equal scores: no novelty, empty mask
    if (valid.back() - valid.front() < 1e-12) return mask;
    const double pos = threshold.percentile / 100.0 * static_cast<double>(valid.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, valid.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    cut = valid[lo] + frac * (valid[hi] - valid[lo]);
  } else {
    cut = threshold.absolute;
  }
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!std::isnan(scores[i]) && scores[i] < cut) mask[i] = 1;
  }
  return mask;
}

std::vector<uint8_t> expand_block_mask(const std::vector<uint8_t>& block_mask, int cols, int rows,
                                       int block_size, int width, int height) {
  std::vector<uint8_t> out(static_cast<size_t>(width) * height, 0);
  for (int br = 0; br < rows; ++br) {
    for (int bc = 0; bc < cols; ++bc) {
      if (!block_mask[static_cast<size_t>(br) * cols + bc]) continue;
      for (int dv = 0; dv < block_size; ++dv) {
        for (int du = 0; du < block_size; ++du) {
          const int u = bc * block_size + du, v = br * block_size + dv;
          if (u < width && v < height) out[static_cast<size_t>(v) * width + u] = 255;
        }
      }
    }
  }
  return out;
}

TemporalMedianFilter::TemporalMedianFilter(int window) : window_(window) {
  if (window < 3 || window % 2 == 0) {
    throw std::invalid_argument("median window must be odd and >= 3");
  }
}

std::vector<std::pair<TemporalMedianFilter::CellKey, bool>> TemporalMedianFilter::push(
    const std::vector<std::pair<CellKey, bool>>& obs) {
  std::vector<std::pair<CellKey, bool>> out;
  out.reserve(obs.size());
  for (const auto& [cell, dirt] : obs) {
    auto& buf = buffers_[cell];
    buf.push_back(dirt ? 1 : 0);
    if (static_cast<int>(buf.size()) > window_) buf.pop_front();
    int ones = 0;
    for (uint8_t v : buf) ones += v;
    out.push_back({cell, 2 * ones > static_cast<int>(buf.size())});
  }
  return out;
}

}  // namespace scrubber
