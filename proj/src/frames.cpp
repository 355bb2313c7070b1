#include "scrubber/frames.hpp"

#include <stdexcept>

#include "scrubber/geometry.hpp"

namespace scrubber {

ColoredCloud make_registered_cloud(const DepthFrame& depth, const ColorFrame& rgb,
                                   const Eigen::Matrix4d& T) {
  if (depth.width != rgb.width || depth.height != rgb.height) {
    throw std::invalid_argument("registered pair dimensions differ");
  }
  ColoredCloud cloud;
  cloud.timestamp = depth.timestamp;
  const Eigen::Matrix3d R = T.block<3, 3>(0, 0);
  const Eigen::Vector3d o = T.block<3, 1>(0, 3);
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      if (depth.at(u, v) <= 0.0f) continue;
      const Eigen::Vector3d p = R * depth.unproject(u, v) + o;
      const uint8_t* c = rgb.pixel(u, v);
      ColoredPoint pt;
      pt.x = static_cast<float>(p.x());
      pt.y = static_cast<float>(p.y());
      pt.z = static_cast<float>(p.z());
      pt.r = c[0];
      pt.g = c[1];
      pt.b = c[2];
      cloud.points.push_back(pt);
    }
  }
  return cloud;
}

}  // namespace scrubber
