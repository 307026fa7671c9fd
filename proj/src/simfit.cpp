#include "volcap/simfit.hpp"

#include <string>

namespace volcap {

Eigen::Matrix3d Similarity2D::matrix() const {
  const double c = scale * std::cos(angle), s = scale * std::sin(angle);
  Eigen::Matrix3d m;
  m << c, -s, translation.x(), s, c, translation.y(), 0.0, 0.0, 1.0;
  return m;
}

Vec2 Similarity2D::apply(const Vec2& p) const {
  const double c = scale * std::cos(angle), s = scale * std::sin(angle);
  return {c * p.x() - s * p.y() + translation.x(), s * p.x() + c * p.y() + translation.y()};
}

Similarity2D Similarity2D::inverse() const {
  Similarity2D inv;
  inv.scale = 1.0 / scale;
  inv.angle = -angle;
  inv.translation = -inv.apply(translation);
  return inv;
}

SimilarityFit fit_similarity(std::span<const Vec2> src, std::span<const Vec2> dst) {
  if (src.size() != dst.size()) throw ContractError("fit_similarity: point counts differ");
  if (src.size() < 2) throw ContractError("fit_similarity: need at least 2 point pairs");
  const double n = static_cast<double>(src.size());

  Vec2 mu_src = Vec2::Zero(), mu_dst = Vec2::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    mu_src += src[i];
    mu_dst += dst[i];
  }
  mu_src /= n;
  mu_dst /= n;

  // Cross-covariance reduced to its rotation-relevant parts: the dot and cross sums.
  double var_src = 0.0, var_dst = 0.0, dot = 0.0, cross = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec2 a = src[i] - mu_src, b = dst[i] - mu_dst;
    var_src += a.squaredNorm();
    var_dst += b.squaredNorm();
    dot += a.dot(b);
    cross += a.x() * b.y() - a.y() * b.x();
  }
  if (var_src <= 1e-24 * n) throw DegenerateError("fit_similarity: source points are coincident");
  const double magnitude = std::hypot(dot, cross);
  if (magnitude <= 0.0) throw DegenerateError("fit_similarity: target points are coincident");

  SimilarityFit fit;
  fit.transform.angle = std::atan2(cross, dot);
  fit.transform.scale = magnitude / var_src;
  const double c = std::cos(fit.transform.angle), s = std::sin(fit.transform.angle);
  const Vec2 rotated{c * mu_src.x() - s * mu_src.y(), s * mu_src.x() + c * mu_src.y()};
  fit.transform.translation = mu_dst - fit.transform.scale * rotated;
  fit.residual = similarity_residual(fit.transform, src, dst);
  return fit;
}

double similarity_residual(const Similarity2D& t, std::span<const Vec2> src, std::span<const Vec2> dst) {
  if (src.size() != dst.size() || src.empty()) throw ContractError("similarity_residual: bad point sets");
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) sum += (dst[i] - t.apply(src[i])).squaredNorm();
  return std::sqrt(sum / static_cast<double>(src.size()));
}

std::vector<Vec2> apply_similarity(const Similarity2D& t, std::span<const Vec2> points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const Vec2& p : points) out.push_back(t.apply(p));
  return out;
}

double similarity_score(double residual, double sigma_s) {
  if (!(residual >= 0.0)) throw ContractError("similarity_score: residual must be non-negative");
  if (!(sigma_s > 0.0)) throw ContractError("similarity_score: sigma must be positive");
  return std::exp(-sigma_s * residual);
}

double default_similarity_sigma(int width) { return 0.05 * 1280.0 / static_cast<double>(width); }

}  // namespace volcap
