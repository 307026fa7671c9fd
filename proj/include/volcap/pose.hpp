#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "volcap/geometry.hpp"

namespace volcap {

// COCO keypoint order.
enum class Joint : int {
  Nose = 0,
  LeftEye,
  RightEye,
  LeftEar,
  RightEar,
  LeftShoulder,
  RightShoulder,
  LeftElbow,
  RightElbow,
  LeftWrist,
  RightWrist,
  LeftHip,
  RightHip,
  LeftKnee,
  RightKnee,
  LeftAnkle,
  RightAnkle,
};

inline constexpr int kNumJoints = 17;

std::string_view joint_name(Joint j);
std::optional<Joint> joint_from_name(std::string_view name);
// Left <-> right counterpart; the nose maps to itself.
Joint mirror_joint(Joint j);

struct Keypoint {
  Vec2 position2d = Vec2::Zero();       // pixels
  std::optional<Vec3> position3d;       // meters, camera frame
  bool valid = false;
};

class KeypointSet {
 public:
  KeypointSet() = default;

  Keypoint& operator[](Joint j) { return points_[static_cast<std::size_t>(j)]; }
  const Keypoint& operator[](Joint j) const { return points_[static_cast<std::size_t>(j)]; }
  Keypoint& at(int i) { return points_.at(static_cast<std::size_t>(i)); }
  const Keypoint& at(int i) const { return points_.at(static_cast<std::size_t>(i)); }

  bool valid(Joint j) const { return (*this)[j].valid; }
  bool has3d(Joint j) const { return (*this)[j].valid && (*this)[j].position3d.has_value(); }
  const Vec2& p2(Joint j) const { return (*this)[j].position2d; }
  const Vec3& p3(Joint j) const { return *(*this)[j].position3d; }

  void set(Joint j, const Vec2& p2, std::optional<Vec3> p3 = std::nullopt) {
    (*this)[j] = Keypoint{p2, p3, true};
  }

  // Enforces: valid => finite 2D position, 3D present => valid.
  void validate() const;

 private:
  std::array<Keypoint, kNumJoints> points_{};
};

enum class PartGroup : int {
  Head = 0,
  Body,
  LeftUpperArm,
  RightUpperArm,
  LeftLowerArm,
  RightLowerArm,
  LeftUpperLeg,
  RightUpperLeg,
  LeftLowerLeg,
  RightLowerLeg,
};

inline constexpr int kNumParts = 10;

std::string_view part_name(PartGroup p);
const std::vector<Joint>& part_joints(PartGroup p);
inline constexpr std::array<PartGroup, kNumParts> kAllParts = {
    PartGroup::Head,         PartGroup::Body,          PartGroup::LeftUpperArm, PartGroup::RightUpperArm,
    PartGroup::LeftLowerArm, PartGroup::RightLowerArm, PartGroup::LeftUpperLeg, PartGroup::RightUpperLeg,
    PartGroup::LeftLowerLeg, PartGroup::RightLowerLeg};

// Re-expresses 3D keypoints in another camera frame and re-projects them.
// Keypoints without 3D become invalid; so do those that land behind the camera.
KeypointSet transform_keypoints(const KeypointSet& kp, const RigidTransform& t, const Intrinsics& k);

// Assigns 3D from the median of valid depths in the 3x3 neighborhood of each
// valid keypoint's nearest pixel.
KeypointSet lift_keypoints(const KeypointSet& kp, const DepthMap& depth, const Intrinsics& k);

// Heatmap sigma for an image width: 6 px at 1280 px, proportional otherwise.
double default_heatmap_sigma(int width);

// One Gaussian channel per joint, zero for invalid joints.
std::vector<ScalarImage> encode_heatmaps(const KeypointSet& kp, int width, int height, double sigma);

// Fills missing limb endpoints and face points from their bilateral twins.
// Returns nullopt if nose, shoulders or hips are still missing afterwards.
std::optional<KeypointSet> extrapolate_missing(const KeypointSet& kp);

// Forward direction of the head frame built from the eyes and nose.
Vec3 head_direction(const KeypointSet& kp);
// Forward direction of the torso frame built from the shoulders and the left hip.
Vec3 torso_direction(const KeypointSet& kp);

}  // namespace volcap
