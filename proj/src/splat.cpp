#include "volcap/splat.hpp"

#include <cmath>
#include <limits>

#include "volcap/parallel.hpp"

namespace volcap {

namespace {

struct Projected {
  double u, v, z;
  int cx, cy;  // nearest pixel
};

}  // namespace

SplatOutput splat_render(const PointCloud& cloud, const Intrinsics& k, const SplatOptions& options) {
  if (options.kernel_radius < 0) throw ContractError("splat_render: kernel radius must be >= 0");
  const int w = k.width, h = k.height, r = options.kernel_radius;

  SplatOutput out{RgbImage(w, h, Rgb::Zero()), DepthMap(w, h, 0.0), ScalarImage(w, h, 0.0),
                  Image<std::int64_t>(w, h, -1)};

  std::vector<Projected> proj(cloud.size());
  std::vector<char> live(cloud.size(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    if (!(p.z() > 0.0) || !p.allFinite()) continue;
    const double u = k.fx * p.x() / p.z() + k.ox;
    const double v = k.fy * p.y() / p.z() + k.oy;
    const double cx = std::floor(u + 0.5), cy = std::floor(v + 0.5);
    if (cx < -r || cy < -r || cx >= w + r || cy >= h + r) continue;
    proj[i] = {u, v, p.z(), static_cast<int>(cx), static_cast<int>(cy)};
    live[i] = 1;
  }

  Image<double> key(w, h, std::numeric_limits<double>::infinity());
  // Each worker owns a band of rows and scans every point, so no pixel is
  // shared between threads.
  parallel_for(h, [&](int row_begin, int row_end) {
    for (std::size_t i = 0; i < proj.size(); ++i) {
      if (!live[i]) continue;
      const Projected& p = proj[i];
      const int y0 = std::max(row_begin, p.cy - r), y1 = std::min(row_end - 1, p.cy + r);
      if (y0 > y1) continue;
      const int x0 = std::max(0, p.cx - r), x1 = std::min(w - 1, p.cx + r);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          double effective = p.z;
          if (x != p.cx || y != p.cy) {
            const double du = x - p.u, dv = y - p.v;
            effective = p.z * (1.0 + options.depth_falloff * (du * du + dv * dv));
          }
          // Points are visited in index order, so strict < keeps the lowest index on ties.
          if (effective < key(x, y)) {
            key(x, y) = effective;
            out.point(x, y) = static_cast<std::int64_t>(i);
          }
        }
      }
    }
  });

  for (std::size_t j = 0; j < out.point.size(); ++j) {
    const std::int64_t idx = out.point[j];
    if (idx < 0) continue;
    out.color[j] = cloud.colors[static_cast<std::size_t>(idx)];
    out.depth[j] = proj[static_cast<std::size_t>(idx)].z;
    out.coverage[j] = 1.0;
  }
  return out;
}

}  // namespace volcap
