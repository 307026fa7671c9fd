#pragma once

#include <cstdint>

#include "volcap/geometry.hpp"

namespace volcap {

struct SplatOutput {
  RgbImage color;            // black where uncovered
  DepthMap depth;            // depth of the winning point, 0 where uncovered
  ScalarImage coverage;      // 1 covered, 0 uncovered
  Image<std::int64_t> point; // index of the winning point, -1 where uncovered
};

struct SplatOptions {
  int kernel_radius = 1;
  // Footprint pixels away from the point's own pixel compete with an
  // effective depth z * (1 + falloff * d^2), d the distance in pixels from the
  // projected center. 0 gives a plain nearest-depth z-buffer.
  double depth_falloff = 0.25;
};

// Renders each point as a (2r+1)^2 footprint with z-buffering. Winner per pixel
// is the minimum (effective depth, point index), so the result is independent
// of processing order and thread count.
SplatOutput splat_render(const PointCloud& cloud, const Intrinsics& k, const SplatOptions& options = {});

// Gathers a per-point attribute through the winning-point buffer.
template <typename T>
Image<T> gather(const SplatOutput& out, const std::vector<T>& per_point, const T& empty) {
  Image<T> img(out.point.width(), out.point.height(), empty);
  for (std::size_t i = 0; i < out.point.size(); ++i) {
    const std::int64_t p = out.point[i];
    if (p >= 0) img[i] = per_point[static_cast<std::size_t>(p)];
  }
  return img;
}

}  // namespace volcap
