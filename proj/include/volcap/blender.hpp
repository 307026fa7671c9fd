#pragma once

#include <memory>

#include "volcap/splat.hpp"
#include "volcap/warper.hpp"

namespace volcap {

struct BlendConfig {
  double gamma_g = 1.0;  // grazing-angle exponent on -n.z
  double tau = 0.5;      // warped-silhouette threshold
};

struct BlendInput {
  SplatOutput cloud;     // I_cloud with depth and coverage
  WarpResult warp;       // I_warp and its silhouette
  NormalMap normals;     // novel-view normals, zero where uncovered
  double confidence = 1; // view confidence c in [-1, 1]

  void validate() const;
};

// Per-pixel weight on the re-rendered color.
double blend_weight(double coverage, double confidence, const Vec3& normal, const BlendConfig& cfg);

// Union of re-render coverage and the thresholded warped silhouette.
ScalarImage blend_support(const BlendInput& b, const BlendConfig& cfg);

// w * I_cloud + (1 - w) * I_warp on the support, zero elsewhere.
RgbImage blend(const BlendInput& b, const BlendConfig& cfg);

class BlendRefiner {
 public:
  virtual ~BlendRefiner() = default;
  virtual RgbImage refine(const RgbImage& raw, const BlendInput& input) const = 0;
};

class IdentityBlendRefiner final : public BlendRefiner {
 public:
  RgbImage refine(const RgbImage& raw, const BlendInput&) const override { return raw; }
};

class Blender {
 public:
  explicit Blender(BlendConfig cfg = {});
  // Probes the refiner; throws ContractError on a dimension or range violation.
  void set_refiner(std::shared_ptr<const BlendRefiner> refiner);
  const BlendConfig& config() const noexcept { return cfg_; }
  RgbImage run(const BlendInput& input) const;

 private:
  BlendConfig cfg_;
  std::shared_ptr<const BlendRefiner> refiner_;
};

}  // namespace volcap
