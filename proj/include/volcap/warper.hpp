#pragma once

#include <array>
#include <memory>
#include <optional>

#include "volcap/frame.hpp"
#include "volcap/pose.hpp"
#include "volcap/simfit.hpp"

namespace volcap {

// Capsule and disc sizes for the keypoint-derived part masks.
struct PartGeometry {
  double limb_radius_factor = 0.5;   // x bone length
  double head_radius_factor = 0.45;  // x torso length (mid-shoulders to mid-hips)
  double body_margin_factor = 0.3;   // x torso length
  double edge_px = 3.0;              // linear soft edge width
};

struct PartMaskSet {
  std::array<ScalarImage, kNumParts> parts;
  ScalarImage background;  // 1 - max over parts

  const ScalarImage& operator[](PartGroup p) const { return parts[static_cast<std::size_t>(p)]; }
};

PartMaskSet part_masks_geometric(const KeypointSet& kp, int width, int height, const PartGeometry& geometry = {});

struct WarpResult {
  RgbImage color;                // I_warp, un-premultiplied winner texture
  ScalarImage silhouette;        // refined foreground mask
  ScalarImage part_silhouette;   // max over warped part masks
  std::array<RgbImage, kNumParts> textures;      // warped (color x mask) per part
  std::array<ScalarImage, kNumParts> masks;      // warped part masks
  std::array<std::optional<Similarity2D>, kNumParts> transforms;  // empty: group skipped

  int width() const noexcept { return color.width(); }
  int height() const noexcept { return color.height(); }
};

// Per-part similarity warp of the calibration texture and masks. Each group's
// mask is restricted to the calibration foreground before warping.
WarpResult warp_parts(const Frame& calib, const KeypointSet& calib_kp, const KeypointSet& target_kp,
                      const PartMaskSet& masks);

// Hook where a learned mask/texture refinement would sit. Implementations must
// keep image dimensions and [0, 1] ranges.
class WarpRefiner {
 public:
  virtual ~WarpRefiner() = default;
  virtual WarpResult refine(const WarpResult& raw) const = 0;
};

class IdentityWarpRefiner final : public WarpRefiner {
 public:
  WarpResult refine(const WarpResult& raw) const override { return raw; }
};

// Throws ContractError if `refined` changed dimensions or left [0, 1].
void check_refined_warp(const WarpResult& raw, const WarpResult& refined);

// Max-rule silhouette plus winner-take-all texture, then the refiner.
class Compositor {
 public:
  Compositor();
  // Probes the refiner on a small synthetic input; throws ContractError when
  // it breaks the dimension or range contract.
  void set_refiner(std::shared_ptr<const WarpRefiner> refiner);
  WarpResult composite(const WarpResult& layers) const;

 private:
  std::shared_ptr<const WarpRefiner> refiner_;
};

WarpResult composite(const WarpResult& layers);

}  // namespace volcap
