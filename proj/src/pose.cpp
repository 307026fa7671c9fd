#include "volcap/pose.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace volcap {

namespace {

constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "nose",        "left_eye",       "right_eye",  "left_ear",    "right_ear",  "left_shoulder",
    "right_shoulder", "left_elbow",  "right_elbow", "left_wrist", "right_wrist", "left_hip",
    "right_hip",   "left_knee",      "right_knee", "left_ankle",  "right_ankle"};

constexpr std::array<std::string_view, kNumParts> kPartNames = {
    "head",           "body",           "left_upper_arm", "right_upper_arm", "left_lower_arm",
    "right_lower_arm", "left_upper_leg", "right_upper_leg", "left_lower_leg", "right_lower_leg"};

// Limb bones in parent -> child order; parents precede children so a
// reconstructed joint can anchor the next bone down the chain.
constexpr std::array<std::pair<Joint, Joint>, 8> kLimbBones = {{
    {Joint::LeftShoulder, Joint::LeftElbow},
    {Joint::RightShoulder, Joint::RightElbow},
    {Joint::LeftElbow, Joint::LeftWrist},
    {Joint::RightElbow, Joint::RightWrist},
    {Joint::LeftHip, Joint::LeftKnee},
    {Joint::RightHip, Joint::RightKnee},
    {Joint::LeftKnee, Joint::LeftAnkle},
    {Joint::RightKnee, Joint::RightAnkle},
}};

Vec2 reflect2(const Vec2& v, const Vec2& axis) { return 2.0 * v.dot(axis) * axis - v; }
Vec3 reflect3(const Vec3& v, const Vec3& normal) { return v - 2.0 * v.dot(normal) * normal; }

// Cross-product frame shared by head and torso directions.
Vec3 frame_forward(const Vec3& left, const Vec3& right, const Vec3& from, const Vec3& to, const char* what) {
  const Vec3 across = right - left;
  const Vec3 along = to - from;
  if (across.norm() < 1e-6 || along.norm() < 1e-6) {
    throw DegenerateError(std::string(what) + ": coincident frame keypoints");
  }
  const Vec3 forward = across.normalized().cross(along.normalized());
  if (forward.norm() < 1e-9) throw DegenerateError(std::string(what) + ": collinear frame keypoints");
  return forward.normalized();
}

}  // namespace

std::string_view joint_name(Joint j) { return kJointNames[static_cast<std::size_t>(j)]; }

std::optional<Joint> joint_from_name(std::string_view name) {
  for (int i = 0; i < kNumJoints; ++i) {
    if (kJointNames[static_cast<std::size_t>(i)] == name) return static_cast<Joint>(i);
  }
  return std::nullopt;
}

Joint mirror_joint(Joint j) {
  const int i = static_cast<int>(j);
  if (i == 0) return j;
  // Left/right pairs are adjacent with the left member at an odd index.
  return static_cast<Joint>(i % 2 == 1 ? i + 1 : i - 1);
}

void KeypointSet::validate() const {
  for (int i = 0; i < kNumJoints; ++i) {
    const Keypoint& k = points_[static_cast<std::size_t>(i)];
    if (k.valid && !k.position2d.allFinite()) {
      throw ContractError("keypoints: valid keypoint with non-finite position: " +
                          std::string(kJointNames[static_cast<std::size_t>(i)]));
    }
    if (k.position3d && !k.valid) {
      throw ContractError("keypoints: 3D position on an invalid keypoint: " +
                          std::string(kJointNames[static_cast<std::size_t>(i)]));
    }
  }
}

std::string_view part_name(PartGroup p) { return kPartNames[static_cast<std::size_t>(p)]; }

const std::vector<Joint>& part_joints(PartGroup p) {
  static const std::array<std::vector<Joint>, kNumParts> groups = {{
      {Joint::Nose, Joint::LeftEye, Joint::RightEye, Joint::LeftEar, Joint::RightEar},
      {Joint::LeftShoulder, Joint::RightShoulder, Joint::LeftHip, Joint::RightHip},
      {Joint::LeftShoulder, Joint::LeftElbow},
      {Joint::RightShoulder, Joint::RightElbow},
      {Joint::LeftElbow, Joint::LeftWrist},
      {Joint::RightElbow, Joint::RightWrist},
      {Joint::LeftHip, Joint::LeftKnee},
      {Joint::RightHip, Joint::RightKnee},
      {Joint::LeftKnee, Joint::LeftAnkle},
      {Joint::RightKnee, Joint::RightAnkle},
  }};
  return groups[static_cast<std::size_t>(p)];
}

KeypointSet transform_keypoints(const KeypointSet& kp, const RigidTransform& t, const Intrinsics& k) {
  KeypointSet out;
  for (int i = 0; i < kNumJoints; ++i) {
    const Keypoint& src = kp.at(i);
    if (!src.valid || !src.position3d) continue;
    const Vec3 moved = t.apply(*src.position3d);
    if (!(moved.z() > 0.0)) continue;
    out.at(i) = Keypoint{project(moved, k).pixel, moved, true};
  }
  return out;
}

KeypointSet lift_keypoints(const KeypointSet& kp, const DepthMap& depth, const Intrinsics& k) {
  KeypointSet out = kp;
  std::vector<double> samples;
  for (int i = 0; i < kNumJoints; ++i) {
    Keypoint& p = out.at(i);
    if (!p.valid) continue;
    p.position3d.reset();
    const int cx = static_cast<int>(std::floor(p.position2d.x() + 0.5));
    const int cy = static_cast<int>(std::floor(p.position2d.y() + 0.5));
    samples.clear();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (depth.contains(cx + dx, cy + dy) && depth(cx + dx, cy + dy) > 0.0) {
          samples.push_back(depth(cx + dx, cy + dy));
        }
      }
    }
    if (samples.empty()) continue;
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    const double median = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    p.position3d = backproject(p.position2d, median, k);
  }
  return out;
}

double default_heatmap_sigma(int width) { return 6.0 * static_cast<double>(width) / 1280.0; }

std::vector<ScalarImage> encode_heatmaps(const KeypointSet& kp, int width, int height, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("encode_heatmaps: sigma must be positive");
  std::vector<ScalarImage> channels;
  channels.reserve(kNumJoints);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int i = 0; i < kNumJoints; ++i) {
    ScalarImage ch(width, height, 0.0);
    const Keypoint& p = kp.at(i);
    if (p.valid) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          const double dx = x - p.position2d.x(), dy = y - p.position2d.y();
          ch(x, y) = std::exp(-(dx * dx + dy * dy) * inv);
        }
      }
    }
    channels.push_back(std::move(ch));
  }
  return channels;
}

std::optional<KeypointSet> extrapolate_missing(const KeypointSet& kp) {
  auto torso_present = [](const KeypointSet& s) {
    return s.valid(Joint::LeftShoulder) && s.valid(Joint::RightShoulder) && s.valid(Joint::LeftHip) &&
           s.valid(Joint::RightHip);
  };
  if (!torso_present(kp) || !kp.valid(Joint::Nose)) return std::nullopt;

  KeypointSet out = kp;
  const Vec2 mid_shoulders = 0.5 * (kp.p2(Joint::LeftShoulder) + kp.p2(Joint::RightShoulder));
  const Vec2 mid_hips = 0.5 * (kp.p2(Joint::LeftHip) + kp.p2(Joint::RightHip));
  if ((mid_hips - mid_shoulders).norm() < 1e-9) return std::nullopt;
  // Image-space symmetry axis of the body.
  const Vec2 body_axis = (mid_hips - mid_shoulders).normalized();

  // Sagittal plane normal, when the torso has 3D.
  std::optional<Vec3> sagittal;
  if (kp.has3d(Joint::LeftShoulder) && kp.has3d(Joint::RightShoulder) && kp.has3d(Joint::LeftHip) &&
      kp.has3d(Joint::RightHip)) {
    const Vec3 across = (kp.p3(Joint::RightShoulder) - kp.p3(Joint::LeftShoulder)) +
                        (kp.p3(Joint::RightHip) - kp.p3(Joint::LeftHip));
    if (across.norm() > 1e-9) sagittal = across.normalized();
  }

  for (const auto& [parent, child] : kLimbBones) {
    if (out.valid(child) || !out.valid(parent)) continue;
    const Joint twin_parent = mirror_joint(parent), twin_child = mirror_joint(child);
    if (!out.valid(twin_parent) || !out.valid(twin_child)) continue;
    const Vec2 bone = out.p2(twin_child) - out.p2(twin_parent);
    Keypoint rebuilt{out.p2(parent) + reflect2(bone, body_axis), std::nullopt, true};
    if (sagittal && out.has3d(parent) && out.has3d(twin_parent) && out.has3d(twin_child)) {
      rebuilt.position3d = out.p3(parent) + reflect3(out.p3(twin_child) - out.p3(twin_parent), *sagittal);
    }
    out[child] = rebuilt;
  }

  // Eyes reflect through the nose along the body axis; ears through the eye-nose axis.
  const Joint eyes[] = {Joint::LeftEye, Joint::RightEye};
  for (Joint eye : eyes) {
    const Joint twin = mirror_joint(eye);
    if (out.valid(eye) || !out.valid(twin)) continue;
    const Vec2 nose = out.p2(Joint::Nose);
    Keypoint rebuilt{nose + reflect2(out.p2(twin) - nose, body_axis), std::nullopt, true};
    if (sagittal && out.has3d(Joint::Nose) && out.has3d(twin)) {
      const Vec3 nose3 = out.p3(Joint::Nose);
      rebuilt.position3d = nose3 + reflect3(out.p3(twin) - nose3, *sagittal);
    }
    out[eye] = rebuilt;
  }
  const Joint ears[] = {Joint::LeftEar, Joint::RightEar};
  for (Joint ear : ears) {
    const Joint twin = mirror_joint(ear);
    if (out.valid(ear) || !out.valid(twin) || !out.valid(Joint::LeftEye) || !out.valid(Joint::RightEye)) continue;
    const Vec2 nose = out.p2(Joint::Nose);
    const Vec2 mid_eyes = 0.5 * (out.p2(Joint::LeftEye) + out.p2(Joint::RightEye));
    const Vec2 face_axis = (mid_eyes - nose).norm() > 1e-9 ? Vec2((mid_eyes - nose).normalized()) : body_axis;
    Keypoint rebuilt{nose + reflect2(out.p2(twin) - nose, face_axis), std::nullopt, true};
    if (out.has3d(twin) && out.has3d(Joint::LeftEye) && out.has3d(Joint::RightEye)) {
      const Vec3 across = out.p3(Joint::RightEye) - out.p3(Joint::LeftEye);
      if (across.norm() > 1e-9) {
        const Vec3 mid3 = 0.5 * (out.p3(Joint::LeftEye) + out.p3(Joint::RightEye));
        rebuilt.position3d = mid3 + reflect3(out.p3(twin) - mid3, across.normalized());
      }
    }
    out[ear] = rebuilt;
  }

  if (!torso_present(out) || !out.valid(Joint::Nose)) return std::nullopt;
  return out;
}

Vec3 head_direction(const KeypointSet& kp) {
  if (!kp.has3d(Joint::Nose) || !kp.has3d(Joint::LeftEye) || !kp.has3d(Joint::RightEye)) {
    throw DegenerateError("head_direction: nose and eyes need 3D positions");
  }
  const Vec3 mid = 0.5 * (kp.p3(Joint::LeftEye) + kp.p3(Joint::RightEye));
  return frame_forward(kp.p3(Joint::LeftEye), kp.p3(Joint::RightEye), mid, kp.p3(Joint::Nose), "head_direction");
}

Vec3 torso_direction(const KeypointSet& kp) {
  if (!kp.has3d(Joint::LeftShoulder) || !kp.has3d(Joint::RightShoulder) || !kp.has3d(Joint::LeftHip)) {
    throw DegenerateError("torso_direction: shoulders and left hip need 3D positions");
  }
  const Vec3 mid = 0.5 * (kp.p3(Joint::LeftShoulder) + kp.p3(Joint::RightShoulder));
  return frame_forward(kp.p3(Joint::LeftShoulder), kp.p3(Joint::RightShoulder), kp.p3(Joint::LeftHip), mid,
                       "torso_direction");
}

}  // namespace volcap
