#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "volcap/warper.hpp"

namespace volcap {

// Mean absolute difference on the 0-255 scale over all channels of the pixels
// where mask > 0.5 (all pixels when no mask). Returns 0 for an empty mask.
double l1_image(const RgbImage& a, const RgbImage& b, const ScalarImage* mask = nullptr);

double mse_255(const RgbImage& a, const RgbImage& b, const ScalarImage* mask = nullptr);

// 10 log10(255^2 / MSE). Identical inputs give +infinity.
double psnr(const RgbImage& a, const RgbImage& b, const ScalarImage* mask = nullptr);

// Five-scale MS-SSIM with an 11x11 Gaussian window (sigma 1.5) and valid
// filtering, averaged over the color channels. Needs min(width, height) >= 161.
double ms_ssim(const RgbImage& a, const RgbImage& b);

// Same on a single scalar channel given on the 0-255 scale.
double ms_ssim_channel(const ScalarImage& a, const ScalarImage& b);

struct MaskLosses {
  double bg = 0.0;     // |background - (1 - gt)|
  double fg = 0.0;     // |part silhouette - gt|
  double fgref = 0.0;  // |refined silhouette - gt|
};

MaskLosses mask_losses(const PartMaskSet& masks, const WarpResult& warp, const ScalarImage& gt);

struct LossConfig {
  double w_bg = 1.0;
  double w_fg = 1.0;
  double w_fgref = 1.0;
  double w_rec = 1.0;
  double w_l1 = 0.01;  // photometric term inside the blender reconstruction loss
};

double weighted_mask_loss(const MaskLosses& losses, const LossConfig& cfg);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::vector<double> features(const RgbImage& image) const = 0;
};

class IdentityFeatures final : public FeatureExtractor {
 public:
  std::vector<double> features(const RgbImage& image) const override;
};

// Concatenated levels of a Gaussian pyramid (binomial 5-tap blur, decimation by 2).
class GaussianPyramidFeatures final : public FeatureExtractor {
 public:
  explicit GaussianPyramidFeatures(int levels = 3) : levels_(levels) {}
  std::vector<double> features(const RgbImage& image) const override;

 private:
  int levels_;
};

// RMS feature distance plus w_l1 times the mean absolute color error, both on
// the unit color scale.
double blender_rec_loss(const RgbImage& pred, const RgbImage& gt, const FeatureExtractor& features,
                        double w_l1 = 0.01);

}  // namespace volcap
