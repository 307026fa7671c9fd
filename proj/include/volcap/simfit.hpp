#pragma once

#include <Eigen/Core>

#include <cmath>
#include <span>
#include <vector>

#include "volcap/image.hpp"

namespace volcap {

// 4-DOF 2D similarity: x -> scale * R(angle) * x + translation.
struct Similarity2D {
  double scale = 1.0;
  double angle = 0.0;  // radians
  Vec2 translation = Vec2::Zero();

  static Similarity2D identity() { return {}; }
  Eigen::Matrix3d matrix() const;
  Vec2 apply(const Vec2& p) const;
  Similarity2D inverse() const;
};

struct SimilarityFit {
  Similarity2D transform;
  double residual = 0.0;  // root-mean-square distance after alignment, pixels
};

// Closed-form least-squares similarity mapping src onto dst.
// Throws DegenerateError when either point set collapses to a single point.
SimilarityFit fit_similarity(std::span<const Vec2> src, std::span<const Vec2> dst);

// Root-mean-square alignment error of an arbitrary transform.
double similarity_residual(const Similarity2D& t, std::span<const Vec2> src, std::span<const Vec2> dst);

std::vector<Vec2> apply_similarity(const Similarity2D& t, std::span<const Vec2> points);

// Inverse-warps an image with bilinear sampling; taps outside the source read as zero.
template <typename T>
Image<T> apply_similarity(const Similarity2D& t, const Image<T>& src, const T& zero) {
  Image<T> out(src.width(), src.height(), zero);
  const Similarity2D inv = t.inverse();
  const double c = inv.scale * std::cos(inv.angle), s = inv.scale * std::sin(inv.angle);
  auto tap = [&](int x, int y) -> T { return src.contains(x, y) ? src(x, y) : zero; };
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const double u = c * x - s * y + inv.translation.x();
      const double v = s * x + c * y + inv.translation.y();
      if (!(u > -1.0 && v > -1.0 && u < src.width() && v < src.height())) continue;
      const double fu = std::floor(u), fv = std::floor(v);
      const int x0 = static_cast<int>(fu), y0 = static_cast<int>(fv);
      const double ax = u - fu, ay = v - fv;
      out(x, y) = (1.0 - ax) * (1.0 - ay) * tap(x0, y0) + ax * (1.0 - ay) * tap(x0 + 1, y0) +
                  (1.0 - ax) * ay * tap(x0, y0 + 1) + ax * ay * tap(x0 + 1, y0 + 1);
    }
  }
  return out;
}

// exp(-sigma_s * residual).
double similarity_score(double residual, double sigma_s);

// 0.05 per pixel of residual at 1280 px width, scaled inversely with width.
double default_similarity_sigma(int width);

}  // namespace volcap
