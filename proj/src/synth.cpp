#include "volcap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "volcap/parallel.hpp"

namespace volcap {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Root-frame skeleton constants (meters). Left is +x, down is +y, the body faces -z.
constexpr double kHipHalfWidth = 0.10;
constexpr double kShoulderHalfWidth = 0.18;
constexpr double kShoulderHeight = -0.48;
constexpr double kUpperArm = 0.28;
constexpr double kForearm = 0.25;
constexpr double kThigh = 0.45;
constexpr double kShin = 0.43;
const Vec3 kHeadCenter(0.0, -0.72, 0.0);
constexpr double kHeadRadius = 0.10;

// Face and ear offsets from the head center.
const Vec3 kNoseOffset(0.0, 0.02, -0.10);
const Vec3 kEyeOffset(0.035, -0.025, -0.088);  // left eye; mirror x for right
const Vec3 kEarOffset(0.098, 0.0, 0.01);

const Rgb kHair(0.22, 0.14, 0.09);
const Rgb kEyeColor(0.08, 0.08, 0.10);
constexpr double kAmbient = 0.55;
constexpr double kDiffuse = 0.45;
const Vec3 kLightDir(0.0, -1.0, 0.0);  // towards the light, straight up

Mat3 rot_x(double a) { return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix(); }
Mat3 rot_y(double a) { return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix(); }
Mat3 rot_z(double a) { return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix(); }

void check_limit(const char* name, double value, double lo, double hi) {
  if (!(value >= lo && value <= hi)) {
    throw PoseLimitError(std::string("make_humanoid: ") + name + " = " + std::to_string(value) +
                         " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool checker(double u, double v, double period) {
  const auto a = static_cast<long long>(std::floor(u / period));
  const auto b = static_cast<long long>(std::floor(v / period));
  return ((a + b) & 1) == 0;
}

int sector(double angle, int count) {
  const double t = (angle + std::numbers::pi) / (2.0 * std::numbers::pi);
  return std::min(count - 1, static_cast<int>(std::floor(t * count)));
}

// Ray/capsule intersection (normalized direction); returns distance or -1.
double intersect_capsule(const Vec3& ro, const Vec3& rd, const Vec3& pa, const Vec3& pb, double r) {
  const Vec3 ba = pb - pa, oa = ro - pa;
  const double baba = ba.dot(ba);
  auto sphere = [&](const Vec3& center) {
    const Vec3 oc = ro - center;
    const double b = rd.dot(oc);
    const double c = oc.dot(oc) - r * r;
    const double h = b * b - c;
    return h >= 0.0 ? -b - std::sqrt(h) : -1.0;
  };
  if (baba < 1e-18) return sphere(pa);
  const double bard = ba.dot(rd), baoa = ba.dot(oa), rdoa = rd.dot(oa), oaoa = oa.dot(oa);
  const double a = baba - bard * bard;
  const double b = baba * rdoa - baoa * bard;
  const double c = baba * oaoa - baoa * baoa - r * r * baba;
  if (a > 1e-12) {
    const double h = b * b - a * c;
    if (h < 0.0) return -1.0;
    const double t = (-b - std::sqrt(h)) / a;
    const double y = baoa + t * bard;
    if (y > 0.0 && y < baba) return t;
    return sphere(y <= 0.0 ? pa : pb);
  }
  const double ta = sphere(pa), tb = sphere(pb);
  if (ta < 0.0) return tb;
  if (tb < 0.0) return ta;
  return std::min(ta, tb);
}

Vec3 closest_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return a;
  return a + std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) * ab;
}

}  // namespace

PoseParams PoseParams::standing() {
  PoseParams p;
  p.shoulder_down = {70.0, 70.0};
  p.shoulder_forward = {5.0, 5.0};
  p.elbow_flex = {15.0, 15.0};
  p.hip_abduction = {5.0, 5.0};
  return p;
}

namespace {

struct AngleLimit {
  const char* name;
  std::array<double, 2> PoseParams::*field;
  double lo;
  double hi;
};

constexpr std::array<AngleLimit, 6> kLimits = {{
    {"shoulder_down", &PoseParams::shoulder_down, -60.0, 90.0},
    {"shoulder_forward", &PoseParams::shoulder_forward, -45.0, 90.0},
    {"elbow_flex", &PoseParams::elbow_flex, 0.0, 145.0},
    {"hip_abduction", &PoseParams::hip_abduction, -15.0, 45.0},
    {"hip_flexion", &PoseParams::hip_flexion, -30.0, 100.0},
    {"knee_flex", &PoseParams::knee_flex, 0.0, 140.0},
}};

}  // namespace

PoseParams jitter_pose(const PoseParams& base, double amplitude_degrees, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PoseParams p = base;
  for (const auto& lim : kLimits) {
    for (double& a : p.*lim.field) {
      a = std::clamp(a + amplitude_degrees * (2.0 * uniform01(rng) - 1.0), lim.lo, lim.hi);
    }
  }
  return p;
}

Humanoid make_humanoid(const PoseParams& pose, std::uint64_t seed) {
  for (const auto& lim : kLimits) {
    for (double a : pose.*lim.field) check_limit(lim.name, a, lim.lo, lim.hi);
  }
  if (!std::isfinite(pose.root_yaw) || !pose.root_translation.allFinite()) {
    throw PoseLimitError("make_humanoid: non-finite root transform");
  }

  Humanoid h;
  h.seed = seed;
  std::mt19937_64 rng(seed);
  const std::array<Rgb, 5> base = {Rgb(0.87, 0.70, 0.58), Rgb(0.82, 0.66, 0.55), Rgb(0.20, 0.45, 0.80),
                                   Rgb(0.85, 0.30, 0.20), Rgb(0.25, 0.55, 0.30)};
  for (std::size_t i = 0; i < base.size(); ++i) {
    Rgb c = base[i];
    for (int k = 0; k < 3; ++k) c[k] = std::clamp(c[k] + 0.16 * (uniform01(rng) - 0.5), 0.05, 0.95);
    h.palette[i] = c;
  }

  const Mat3 root = rot_y(pose.root_yaw * kDeg);
  const Vec3& shift = pose.root_translation;
  auto world = [&](const Vec3& p) -> Vec3 { return root * p + shift; };
  auto joint = [&](Joint j) -> Vec3& { return h.joints[static_cast<std::size_t>(j)]; };

  const Joint shoulder[2] = {Joint::LeftShoulder, Joint::RightShoulder};
  const Joint elbow[2] = {Joint::LeftElbow, Joint::RightElbow};
  const Joint wrist[2] = {Joint::LeftWrist, Joint::RightWrist};
  const Joint hip[2] = {Joint::LeftHip, Joint::RightHip};
  const Joint knee[2] = {Joint::LeftKnee, Joint::RightKnee};
  const Joint ankle[2] = {Joint::LeftAnkle, Joint::RightAnkle};

  std::array<Mat3, 2> upper_rot, fore_rot, thigh_rot, shin_rot;
  std::array<Vec3, 2> s_local, e_local, w_local, h_local, k_local, a_local;
  for (int s = 0; s < 2; ++s) {
    const auto i = static_cast<std::size_t>(s);
    const double side = s == 0 ? 1.0 : -1.0;
    upper_rot[i] = rot_x(-pose.shoulder_forward[i] * kDeg) * rot_z(side * pose.shoulder_down[i] * kDeg);
    fore_rot[i] = upper_rot[i] * rot_y(side * pose.elbow_flex[i] * kDeg);
    thigh_rot[i] = rot_x(-pose.hip_flexion[i] * kDeg) * rot_z(-side * pose.hip_abduction[i] * kDeg);
    shin_rot[i] = thigh_rot[i] * rot_x(pose.knee_flex[i] * kDeg);

    s_local[i] = Vec3(side * kShoulderHalfWidth, kShoulderHeight, 0.0);
    e_local[i] = s_local[i] + upper_rot[i] * Vec3(side * kUpperArm, 0.0, 0.0);
    w_local[i] = e_local[i] + fore_rot[i] * Vec3(side * kForearm, 0.0, 0.0);
    h_local[i] = Vec3(side * kHipHalfWidth, 0.0, 0.0);
    k_local[i] = h_local[i] + thigh_rot[i] * Vec3(0.0, kThigh, 0.0);
    a_local[i] = k_local[i] + shin_rot[i] * Vec3(0.0, kShin, 0.0);

    joint(shoulder[s]) = world(s_local[i]);
    joint(elbow[s]) = world(e_local[i]);
    joint(wrist[s]) = world(w_local[i]);
    joint(hip[s]) = world(h_local[i]);
    joint(knee[s]) = world(k_local[i]);
    joint(ankle[s]) = world(a_local[i]);
  }
  joint(Joint::Nose) = world(kHeadCenter + kNoseOffset);
  joint(Joint::LeftEye) = world(kHeadCenter + kEyeOffset);
  joint(Joint::RightEye) = world(kHeadCenter + Vec3(-kEyeOffset.x(), kEyeOffset.y(), kEyeOffset.z()));
  joint(Joint::LeftEar) = world(kHeadCenter + kEarOffset);
  joint(Joint::RightEar) = world(kHeadCenter + Vec3(-kEarOffset.x(), kEarOffset.y(), kEarOffset.z()));

  auto add = [&](const Vec3& a_local_pt, const Vec3& b_local_pt, double radius, const Mat3& bone_rot,
                 const Vec3& origin_local, Surface surface) {
    h.capsules.push_back(Capsule{world(a_local_pt), world(b_local_pt), radius, (root * bone_rot).transpose(),
                                 world(origin_local), surface});
  };
  const Mat3 I = Mat3::Identity();
  add(kHeadCenter, kHeadCenter, kHeadRadius, I, kHeadCenter, Surface::Head);
  add(Vec3(0.0, -0.50, 0.0), Vec3(0.0, -0.64, 0.0), 0.045, I, Vec3::Zero(), Surface::Neck);
  add(Vec3(0.0, -0.42, 0.0), Vec3(0.0, -0.06, 0.0), 0.14, I, Vec3::Zero(), Surface::Shirt);
  add(s_local[0], s_local[1], 0.06, I, Vec3::Zero(), Surface::Shirt);
  add(h_local[0], h_local[1], 0.09, I, Vec3::Zero(), Surface::Trousers);
  for (std::size_t i = 0; i < 2; ++i) {
    add(s_local[i], e_local[i], 0.05, upper_rot[i], s_local[i], Surface::Sleeve);
    add(e_local[i], w_local[i], 0.04, fore_rot[i], e_local[i], Surface::Sleeve);
    add(h_local[i], k_local[i], 0.075, thigh_rot[i], h_local[i], Surface::Trousers);
    add(k_local[i], a_local[i], 0.055, shin_rot[i], k_local[i], Surface::Trousers);
  }
  return h;
}

Rgb capsule_albedo(const Humanoid& h, const Capsule& c, const Vec3& world_point) {
  const Vec3 q = c.frame * (world_point - c.origin);
  const Rgb& base = h.palette[static_cast<std::size_t>(c.surface)];
  switch (c.surface) {
    case Surface::Head: {
      const Vec3 eye(std::abs(q.x()), q.y(), q.z());
      if ((eye - kEyeOffset).norm() < 0.018) return kEyeColor;
      if (q.z() > -0.03 || q.y() < -0.06) return kHair;
      return base;
    }
    case Surface::Neck:
      return base;
    case Surface::Shirt: {
      if (q.z() < 0.0) return checker(q.x(), q.y(), 0.07) ? base : Rgb(0.55 * base);
      // Back: horizontal stripes in a swapped tone.
      const Rgb back(base.z(), base.x(), base.y());
      return (static_cast<long long>(std::floor(q.y() / 0.05)) & 1) ? back : Rgb(0.5 * back + Rgb::Constant(0.35));
    }
    case Surface::Sleeve: {
      const bool ring = (static_cast<long long>(std::floor(std::abs(q.x()) / 0.05)) & 1) != 0;
      const bool half = sector(std::atan2(q.z(), q.y()), 2) == 0;
      Rgb col = ring ? base : Rgb(0.6 * base);
      if (half) col = 0.8 * col + Rgb::Constant(0.15);
      return col;
    }
    case Surface::Trousers: {
      const bool stripe = (sector(std::atan2(q.z(), q.x()), 8) & 1) != 0;
      return stripe ? base : Rgb(0.65 * base);
    }
  }
  return base;
}

Camera orbit_camera(double yaw_degrees, double distance, int width, int height, double focal) {
  Camera cam;
  cam.intrinsics = Intrinsics{focal, focal, (width - 1) / 2.0, (height - 1) / 2.0, width, height};
  cam.extrinsic = RigidTransform(rot_y(-yaw_degrees * kDeg), Vec3(0.0, 0.0, distance));
  return cam;
}

Image<CapsuleHit> trace_capsules(std::span<const Capsule> capsules, const Camera& camera) {
  const Intrinsics& k = camera.intrinsics;
  const RigidTransform& e = camera.extrinsic;
  std::vector<std::pair<Vec3, Vec3>> ends;
  ends.reserve(capsules.size());
  for (const Capsule& c : capsules) ends.emplace_back(e.apply(c.a), e.apply(c.b));
  const RigidTransform to_world = e.inverse();

  Image<CapsuleHit> hits(k.width, k.height);
  parallel_for(k.height, [&](int y0, int y1) {
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < k.width; ++x) {
        const Vec3 ray((x - k.ox) / k.fx, (y - k.oy) / k.fy, 1.0);
        const double ray_len = ray.norm();
        const Vec3 rd = ray / ray_len;
        double best = std::numeric_limits<double>::infinity();
        int best_i = -1;
        for (std::size_t i = 0; i < capsules.size(); ++i) {
          const double t = intersect_capsule(Vec3::Zero(), rd, ends[i].first, ends[i].second, capsules[i].radius);
          if (t > 0.0 && t < best) {
            best = t;
            best_i = static_cast<int>(i);
          }
        }
        if (best_i < 0) continue;
        const Vec3 p_cam = best * rd;
        const auto& [a, b] = ends[static_cast<std::size_t>(best_i)];
        const Vec3 n_cam = (p_cam - closest_on_segment(p_cam, a, b)).normalized();
        hits(x, y) = CapsuleHit{p_cam.z(), best_i, to_world.apply(p_cam), to_world.rotate(n_cam)};
      }
    }
  });
  return hits;
}

Frame render_synthetic(const Humanoid& h, const Camera& camera) {
  camera.intrinsics.validate();
  const int w = camera.intrinsics.width, ht = camera.intrinsics.height;
  const Image<CapsuleHit> hits = trace_capsules(h.capsules, camera);

  Frame f;
  f.camera = camera;
  f.color = RgbImage(w, ht, Rgb::Zero());
  f.depth = DepthMap(w, ht, 0.0);
  f.mask = ScalarImage(w, ht, 0.0);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const CapsuleHit& hit = hits[i];
    if (hit.capsule < 0) continue;
    const Rgb albedo = capsule_albedo(h, h.capsules[static_cast<std::size_t>(hit.capsule)], hit.point_world);
    const double shade = kAmbient + kDiffuse * std::max(0.0, hit.normal_world.dot(kLightDir));
    f.color[i] = (shade * albedo).cwiseMin(1.0);
    f.depth[i] = hit.depth;
    f.mask[i] = 1.0;
  }
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec3 p = camera.extrinsic.apply(h.joints[static_cast<std::size_t>(j)]);
    if (p.z() > 0.0) f.keypoints.at(j) = Keypoint{project(p, camera.intrinsics).pixel, p, true};
  }
  return f;
}

}  // namespace volcap
