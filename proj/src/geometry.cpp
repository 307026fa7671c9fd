#include "volcap/geometry.hpp"

#include <cmath>
#include <string>

namespace volcap {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ContractError("intrinsics: focal length must be positive");
  if (width <= 0 || height <= 0) throw ContractError("intrinsics: image size must be positive");
  if (!(ox >= 0.0 && ox < width && oy >= 0.0 && oy < height)) {
    throw ContractError("intrinsics: principal point outside the image");
  }
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double orth = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (!(orth <= 1e-9) || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw ContractError("rigid transform: rotation is not a proper orthonormal matrix");
  }
  if (!translation.allFinite()) throw ContractError("rigid transform: non-finite translation");
}

RigidTransform RigidTransform::from_axis_angle(const Vec3& axis, double angle, const Vec3& translation) {
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), translation};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidTransform relative_transform(const Camera& from, const Camera& to) {
  return to.extrinsic * from.extrinsic.inverse();
}

Vec3 backproject(const Vec2& pixel, double depth, const Intrinsics& k) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw InvalidDepthError("backproject: depth must be positive, got " + std::to_string(depth));
  }
  return {(pixel.x() - k.ox) * depth / k.fx, (pixel.y() - k.oy) * depth / k.fy, depth};
}

Projection project(const Vec3& x, const Intrinsics& k) {
  if (!(x.z() > 0.0)) throw BehindCameraError("project: point is behind the camera");
  return {{k.fx * x.x() / x.z() + k.ox, k.fy * x.y() / x.z() + k.oy}, x.z()};
}

PointCloud depth_to_cloud(const DepthMap& depth, const RgbImage& rgb, const ScalarImage& mask,
                          const Intrinsics& k, std::vector<Eigen::Vector2i>* source_pixels) {
  require_same_shape(depth, rgb, "depth_to_cloud");
  require_same_shape(depth, mask, "depth_to_cloud");
  PointCloud cloud;
  if (source_pixels) source_pixels->clear();
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double z = depth(x, y);
      if (mask(x, y) <= 0.5 || !(z > 0.0)) continue;
      cloud.positions.push_back(backproject({double(x), double(y)}, z, k));
      cloud.colors.push_back(rgb(x, y));
      if (source_pixels) source_pixels->emplace_back(x, y);
    }
  }
  return cloud;
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.colors = cloud.colors;
  out.positions.reserve(cloud.size());
  for (const Vec3& p : cloud.positions) out.positions.push_back(t.apply(p));
  return out;
}

NormalMap normals_from_depth(const DepthMap& depth, const Intrinsics& k) {
  NormalMap normals(depth.width(), depth.height(), Vec3::Zero());
  auto valid = [&](int x, int y) { return depth.contains(x, y) && depth(x, y) > 0.0; };
  auto point = [&](int x, int y) { return backproject({double(x), double(y)}, depth(x, y), k); };

  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!valid(x, y)) continue;
      // Central difference where both sides exist, one-sided otherwise.
      const bool has_l = valid(x - 1, y), has_r = valid(x + 1, y);
      const bool has_u = valid(x, y - 1), has_d = valid(x, y + 1);
      if (!(has_l || has_r) || !(has_u || has_d)) continue;
      const Vec3 du = point(has_r ? x + 1 : x, y) - point(has_l ? x - 1 : x, y);
      const Vec3 dv = point(x, has_d ? y + 1 : y) - point(x, has_u ? y - 1 : y);
      Vec3 n = du.cross(dv);
      const double len = n.norm();
      if (!(len > 0.0)) continue;
      n /= len;
      if (n.z() > 0.0) n = -n;
      normals(x, y) = n;
    }
  }
  return normals;
}

double view_confidence(const RigidTransform& t) {
  const Vec3 rz = t.rotation().col(2);
  return rz.z() / rz.norm();
}

}  // namespace volcap
