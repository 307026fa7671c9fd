#include "volcap/blender.hpp"

#include <algorithm>
#include <cmath>

namespace volcap {

namespace {

void check_refined(const RgbImage& raw, const RgbImage& refined) {
  if (!refined.same_shape(raw)) throw ContractError("blend refiner changed image dimensions");
  for (const Rgb& c : refined) {
    if (!(c.minCoeff() >= 0.0 && c.maxCoeff() <= 1.0)) {
      throw ContractError("blend refiner produced values outside [0, 1]");
    }
  }
}

}  // namespace

void BlendInput::validate() const {
  require_same_shape(cloud.color, warp.color, "blend");
  require_same_shape(cloud.color, cloud.coverage, "blend");
  require_same_shape(cloud.color, warp.silhouette, "blend");
  require_same_shape(cloud.color, normals, "blend");
  if (!(confidence >= -1.0 && confidence <= 1.0)) throw ContractError("blend: confidence outside [-1, 1]");
}

double blend_weight(double coverage, double confidence, const Vec3& normal, const BlendConfig& cfg) {
  const double facing = std::max(0.0, -normal.z());
  return std::clamp(coverage, 0.0, 1.0) * std::max(0.0, confidence) * std::pow(facing, cfg.gamma_g);
}

ScalarImage blend_support(const BlendInput& b, const BlendConfig& cfg) {
  b.validate();
  ScalarImage support(b.cloud.color.width(), b.cloud.color.height(), 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    support[i] = (b.cloud.coverage[i] > 0.0 || b.warp.silhouette[i] >= cfg.tau) ? 1.0 : 0.0;
  }
  return support;
}

RgbImage blend(const BlendInput& b, const BlendConfig& cfg) {
  const ScalarImage support = blend_support(b, cfg);
  RgbImage out(support.width(), support.height(), Rgb::Zero());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (support[i] == 0.0) continue;
    const double w = blend_weight(b.cloud.coverage[i], b.confidence, b.normals[i], cfg);
    out[i] = w * b.cloud.color[i] + (1.0 - w) * b.warp.color[i];
  }
  return out;
}

Blender::Blender(BlendConfig cfg) : cfg_(cfg), refiner_(std::make_shared<IdentityBlendRefiner>()) {}

void Blender::set_refiner(std::shared_ptr<const BlendRefiner> refiner) {
  if (!refiner) throw ContractError("blend refiner must not be null");
  constexpr int kProbe = 8;
  BlendInput probe;
  probe.cloud = SplatOutput{RgbImage(kProbe, kProbe, Rgb::Constant(0.5)), DepthMap(kProbe, kProbe, 1.0),
                            ScalarImage(kProbe, kProbe, 1.0), Image<std::int64_t>(kProbe, kProbe, 0)};
  probe.warp.color = RgbImage(kProbe, kProbe, Rgb::Constant(0.5));
  probe.warp.silhouette = ScalarImage(kProbe, kProbe, 1.0);
  probe.warp.part_silhouette = ScalarImage(kProbe, kProbe, 1.0);
  probe.normals = NormalMap(kProbe, kProbe, Vec3(0.0, 0.0, -1.0));
  const RgbImage raw = blend(probe, cfg_);
  check_refined(raw, refiner->refine(raw, probe));
  refiner_ = std::move(refiner);
}

RgbImage Blender::run(const BlendInput& input) const {
  RgbImage raw = blend(input, cfg_);
  RgbImage refined = refiner_->refine(raw, input);
  check_refined(raw, refined);
  return refined;
}

}  // namespace volcap
