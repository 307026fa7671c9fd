#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "volcap/frame.hpp"

namespace volcap {

// Joint angles in degrees, per side {left, right}, plus the root motion.
// Zero everywhere is the T-pose. Limits (degrees):
//   shoulder_down    [-60, 90]   arm rotation in the frontal plane, + lowers the arm
//   shoulder_forward [-45, 90]   arm rotation towards the front
//   elbow_flex       [0, 145]    forearm bends towards the front
//   hip_abduction    [-15, 45]   leg rotation outwards
//   hip_flexion      [-30, 100]  leg rotation towards the front
//   knee_flex        [0, 140]    shin bends towards the back
struct PoseParams {
  std::array<double, 2> shoulder_down{0.0, 0.0};
  std::array<double, 2> shoulder_forward{0.0, 0.0};
  std::array<double, 2> elbow_flex{0.0, 0.0};
  std::array<double, 2> hip_abduction{0.0, 0.0};
  std::array<double, 2> hip_flexion{0.0, 0.0};
  std::array<double, 2> knee_flex{0.0, 0.0};
  double root_yaw = 0.0;  // degrees about the vertical axis
  Vec3 root_translation = Vec3::Zero();

  // Relaxed standing pose used for calibration sequences.
  static PoseParams standing();
};

enum class Surface : int { Head = 0, Neck, Shirt, Sleeve, Trousers };

// Swept sphere around segment [a, b]. frame maps world directions into the
// segment's rest frame, so surface texture follows the bone.
struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.1;
  Mat3 frame = Mat3::Identity();
  Vec3 origin = Vec3::Zero();  // texture origin in world coordinates
  Surface surface = Surface::Neck;
};

struct Humanoid {
  std::array<Vec3, 17> joints;  // world coordinates, meters, y down
  std::vector<Capsule> capsules;
  std::array<Rgb, 5> palette;   // albedo per Surface
  std::uint64_t seed = 0;
};

// Adds independent uniform offsets in [-amplitude, amplitude] to every joint
// angle, clamped to the limit table. Root motion is kept.
PoseParams jitter_pose(const PoseParams& base, double amplitude_degrees, std::uint64_t seed);

// Throws PoseLimitError for angles outside the limit table.
Humanoid make_humanoid(const PoseParams& pose, std::uint64_t seed);

// Textured albedo of a capsule surface point.
Rgb capsule_albedo(const Humanoid& h, const Capsule& c, const Vec3& world_point);

// Camera on a horizontal circle around the origin, looking at it.
// yaw_degrees = 0 puts the camera at (0, 0, -distance) facing +z.
Camera orbit_camera(double yaw_degrees, double distance = 3.0, int width = 320, int height = 256,
                    double focal = 300.0);

struct CapsuleHit {
  double depth = 0.0;  // camera z, 0 = miss
  int capsule = -1;
  Vec3 point_world = Vec3::Zero();
  Vec3 normal_world = Vec3::Zero();
};

// Nearest capsule hit along each pixel ray.
Image<CapsuleHit> trace_capsules(std::span<const Capsule> capsules, const Camera& camera);

// Ground-truth RGBD frame with projected joints as keypoints (3D in camera
// coordinates, valid whenever in front of the camera).
Frame render_synthetic(const Humanoid& h, const Camera& camera);

}  // namespace volcap
