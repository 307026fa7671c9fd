#include "volcap/warper.hpp"

#include <algorithm>
#include <cmath>

namespace volcap {

namespace {

double soft_edge(double distance, double radius, double edge) {
  if (distance <= radius) return 1.0;
  if (edge <= 0.0) return 0.0;
  return std::clamp(1.0 - (distance - radius) / edge, 0.0, 1.0);
}

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

// Andrew's monotone chain, counter-clockwise, collinear points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double hull_distance(const Vec2& p, const std::vector<Vec2>& hull) {
  if (hull.size() == 1) return (p - hull[0]).norm();
  if (hull.size() == 2) return segment_distance(p, hull[0], hull[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2& a = hull[i];
    const Vec2& b = hull[(i + 1) % hull.size()];
    if (cross2(a, b, p) < 0.0) inside = false;
    best = std::min(best, segment_distance(p, a, b));
  }
  return inside ? 0.0 : best;
}

template <typename Distance>
ScalarImage rasterize(int width, int height, double radius, double edge, Distance&& distance) {
  ScalarImage m(width, height, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) m(x, y) = soft_edge(distance(Vec2(x, y)), radius, edge);
  }
  return m;
}

std::optional<double> torso_length(const KeypointSet& kp) {
  if (!kp.valid(Joint::LeftShoulder) || !kp.valid(Joint::RightShoulder) || !kp.valid(Joint::LeftHip) ||
      !kp.valid(Joint::RightHip)) {
    return std::nullopt;
  }
  const Vec2 s = 0.5 * (kp.p2(Joint::LeftShoulder) + kp.p2(Joint::RightShoulder));
  const Vec2 h = 0.5 * (kp.p2(Joint::LeftHip) + kp.p2(Joint::RightHip));
  return (s - h).norm();
}

std::vector<Vec2> valid_points(const KeypointSet& kp, const std::vector<Joint>& joints) {
  std::vector<Vec2> pts;
  for (Joint j : joints) {
    if (kp.valid(j)) pts.push_back(kp.p2(j));
  }
  return pts;
}

double max_spread(const std::vector<Vec2>& pts, const Vec2& center) {
  double r = 0.0;
  for (const Vec2& p : pts) r = std::max(r, (p - center).norm());
  return r;
}

}  // namespace

PartMaskSet part_masks_geometric(const KeypointSet& kp, int width, int height, const PartGeometry& geometry) {
  PartMaskSet set;
  const auto torso = torso_length(kp);
  for (PartGroup part : kAllParts) {
    ScalarImage& mask = set.parts[static_cast<std::size_t>(part)];
    const std::vector<Joint>& joints = part_joints(part);
    const std::vector<Vec2> pts = valid_points(kp, joints);
    if (pts.size() < 2) {
      mask = ScalarImage(width, height, 0.0);
      continue;
    }
    if (part == PartGroup::Head) {
      std::vector<Vec2> face = valid_points(kp, {Joint::Nose, Joint::LeftEye, Joint::RightEye});
      if (face.empty()) face = pts;
      Vec2 center = Vec2::Zero();
      for (const Vec2& p : face) center += p;
      center /= static_cast<double>(face.size());
      const double radius = torso ? geometry.head_radius_factor * *torso : 2.0 * max_spread(pts, center);
      mask = rasterize(width, height, radius, geometry.edge_px, [&](const Vec2& q) { return (q - center).norm(); });
    } else if (part == PartGroup::Body) {
      const std::vector<Vec2> hull = convex_hull(pts);
      double diameter = 0.0;
      for (const Vec2& a : pts) diameter = std::max(diameter, max_spread(pts, a));
      const double margin = geometry.body_margin_factor * (torso ? *torso : diameter);
      mask = rasterize(width, height, margin, geometry.edge_px, [&](const Vec2& q) { return hull_distance(q, hull); });
    } else {
      const Vec2 a = pts[0], b = pts[1];
      const double radius = geometry.limb_radius_factor * (b - a).norm();
      mask = rasterize(width, height, radius, geometry.edge_px,
                       [&](const Vec2& q) { return segment_distance(q, a, b); });
    }
  }
  set.background = ScalarImage(width, height, 1.0);
  for (const ScalarImage& m : set.parts) {
    for (std::size_t i = 0; i < m.size(); ++i) set.background[i] = std::min(set.background[i], 1.0 - m[i]);
  }
  return set;
}

WarpResult warp_parts(const Frame& calib, const KeypointSet& calib_kp, const KeypointSet& target_kp,
                      const PartMaskSet& masks) {
  const int w = calib.width(), h = calib.height();
  require_same_shape(calib.color, calib.mask, "warp_parts");
  for (const ScalarImage& m : masks.parts) require_same_shape(calib.color, m, "warp_parts");

  WarpResult out;
  out.color = RgbImage(w, h, Rgb::Zero());
  out.silhouette = ScalarImage(w, h, 0.0);
  out.part_silhouette = ScalarImage(w, h, 0.0);
  for (PartGroup part : kAllParts) {
    const auto p = static_cast<std::size_t>(part);
    out.textures[p] = RgbImage(w, h, Rgb::Zero());
    out.masks[p] = ScalarImage(w, h, 0.0);

    std::vector<Vec2> src, dst;
    for (Joint j : part_joints(part)) {
      if (calib_kp.valid(j) && target_kp.valid(j)) {
        src.push_back(calib_kp.p2(j));
        dst.push_back(target_kp.p2(j));
      }
    }
    if (src.size() < 2) continue;
    Similarity2D t;
    try {
      t = fit_similarity(src, dst).transform;
    } catch (const DegenerateError&) {
      continue;
    }
    out.transforms[p] = t;

    ScalarImage mask(w, h, 0.0);
    RgbImage texture(w, h, Rgb::Zero());
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = masks.parts[p][i] * std::clamp(calib.mask[i], 0.0, 1.0);
      texture[i] = mask[i] * calib.color[i];
    }
    out.masks[p] = apply_similarity(t, mask, 0.0);
    out.textures[p] = apply_similarity(t, texture, Rgb(Rgb::Zero()));
  }
  return out;
}

void check_refined_warp(const WarpResult& raw, const WarpResult& refined) {
  auto in_unit = [](const auto& img) {
    for (const auto& v : img) {
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, double>) {
        if (!(v >= 0.0 && v <= 1.0)) return false;
      } else {
        if (!(v.minCoeff() >= 0.0 && v.maxCoeff() <= 1.0)) return false;
      }
    }
    return true;
  };
  if (!refined.color.same_shape(raw.color) || !refined.silhouette.same_shape(raw.silhouette) ||
      !refined.part_silhouette.same_shape(raw.part_silhouette)) {
    throw ContractError("warp refiner changed image dimensions");
  }
  if (!in_unit(refined.color) || !in_unit(refined.silhouette) || !in_unit(refined.part_silhouette)) {
    throw ContractError("warp refiner produced values outside [0, 1]");
  }
}

Compositor::Compositor() : refiner_(std::make_shared<IdentityWarpRefiner>()) {}

void Compositor::set_refiner(std::shared_ptr<const WarpRefiner> refiner) {
  if (!refiner) throw ContractError("warp refiner must not be null");
  WarpResult probe;
  constexpr int kProbe = 8;
  probe.color = RgbImage(kProbe, kProbe, Rgb::Constant(0.5));
  probe.silhouette = ScalarImage(kProbe, kProbe, 1.0);
  probe.part_silhouette = ScalarImage(kProbe, kProbe, 1.0);
  for (std::size_t p = 0; p < kNumParts; ++p) {
    probe.textures[p] = RgbImage(kProbe, kProbe, Rgb::Zero());
    probe.masks[p] = ScalarImage(kProbe, kProbe, 0.0);
  }
  check_refined_warp(probe, refiner->refine(probe));
  refiner_ = std::move(refiner);
}

WarpResult Compositor::composite(const WarpResult& layers) const {
  const int w = layers.width(), h = layers.height();
  WarpResult out = layers;
  out.color = RgbImage(w, h, Rgb::Zero());
  out.part_silhouette = ScalarImage(w, h, 0.0);
  for (std::size_t i = 0; i < out.color.size(); ++i) {
    double best = 0.0;
    int winner = -1;
    for (std::size_t p = 0; p < kNumParts; ++p) {
      if (layers.masks[p].empty()) continue;
      const double m = layers.masks[p][i];
      if (m > best) {
        best = m;
        winner = static_cast<int>(p);
      }
    }
    out.part_silhouette[i] = std::clamp(best, 0.0, 1.0);
    if (winner >= 0) {
      const Rgb c = layers.textures[static_cast<std::size_t>(winner)][i] / best;
      out.color[i] = c.cwiseMax(0.0).cwiseMin(1.0);
    }
  }
  out.silhouette = out.part_silhouette;

  WarpResult refined = refiner_->refine(out);
  check_refined_warp(out, refined);
  for (std::size_t i = 0; i < refined.color.size(); ++i) {
    if (refined.silhouette[i] <= 0.0) refined.color[i] = Rgb::Zero();
  }
  return refined;
}

WarpResult composite(const WarpResult& layers) { return Compositor().composite(layers); }

}  // namespace volcap
