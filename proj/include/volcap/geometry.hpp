#pragma once

#include <Eigen/Geometry>

#include <vector>

#include "volcap/image.hpp"

namespace volcap {

// Pinhole intrinsics in pixels. Pixel (x, y) addresses the center of
// column x, row y.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double ox = 0.0;
  double oy = 0.0;
  int width = 1;
  int height = 1;

  // Throws ContractError unless fx, fy > 0 and the principal point lies in the image.
  void validate() const;
  bool operator==(const Intrinsics&) const = default;
};

// Rigid motion x -> R x + t. Rotation is kept orthonormal with det +1.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static RigidTransform from_axis_angle(const Vec3& axis, double angle,
                                        const Vec3& translation = Vec3::Zero());

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& x) const { return rotation_ * x + translation_; }
  Vec3 rotate(const Vec3& v) const { return rotation_ * v; }
  RigidTransform inverse() const;
  // (a * b).apply(x) == a.apply(b.apply(x))
  RigidTransform operator*(const RigidTransform& rhs) const;
  Eigen::Matrix4d matrix() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

// Intrinsics plus the world-to-camera extrinsic.
struct Camera {
  Intrinsics intrinsics;
  RigidTransform extrinsic;
};

// Transform taking points in `from` camera coordinates to `to` camera coordinates.
RigidTransform relative_transform(const Camera& from, const Camera& to);

struct PointCloud {
  std::vector<Vec3> positions;  // meters
  std::vector<Rgb> colors;      // [0, 1]

  std::size_t size() const noexcept { return positions.size(); }
  bool empty() const noexcept { return positions.empty(); }
};

struct Projection {
  Vec2 pixel;
  double depth = 0.0;
};

Vec3 backproject(const Vec2& pixel, double depth, const Intrinsics& k);
Projection project(const Vec3& x, const Intrinsics& k);

// One point per masked pixel (mask > 0.5) with positive depth.
// Also reports the source pixel of each point when `source_pixels` is set.
PointCloud depth_to_cloud(const DepthMap& depth, const RgbImage& rgb, const ScalarImage& mask,
                          const Intrinsics& k, std::vector<Eigen::Vector2i>* source_pixels = nullptr);

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t);

// Central differences over back-projected neighbors; zero where the 4-neighborhood
// lacks valid depth. Normals face the camera (n.z < 0).
NormalMap normals_from_depth(const DepthMap& depth, const Intrinsics& k);

// Cosine between the input viewing axis and the novel camera's viewing axis.
double view_confidence(const RigidTransform& t);

}  // namespace volcap
