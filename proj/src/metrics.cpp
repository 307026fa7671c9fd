#include "volcap/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace volcap {

namespace {

constexpr std::array<double, 5> kScaleWeights = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kMax = 255.0;

std::array<double, kWindow> gaussian_taps() {
  std::array<double, kWindow> g{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double x = i - (kWindow - 1) / 2.0;
    g[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * kWindowSigma * kWindowSigma));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable 'valid' Gaussian filtering.
ScalarImage filter_valid(const ScalarImage& img) {
  static const auto g = gaussian_taps();
  const int ow = img.width() - kWindow + 1, oh = img.height() - kWindow + 1;
  ScalarImage rows(ow, img.height(), 0.0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[static_cast<std::size_t>(k)] * img(x + k, y);
      rows(x, y) = acc;
    }
  }
  ScalarImage out(ow, oh, 0.0);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += g[static_cast<std::size_t>(k)] * rows(x, y + k);
      out(x, y) = acc;
    }
  }
  return out;
}

// 2x2 average pooling; odd sizes first repeat their last row/column.
ScalarImage downsample(const ScalarImage& img) {
  const int ow = (img.width() + 1) / 2, oh = (img.height() + 1) / 2;
  ScalarImage out(ow, oh, 0.0);
  auto at = [&](int x, int y) { return img(std::min(x, img.width() - 1), std::min(y, img.height() - 1)); };
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      out(x, y) = 0.25 * (at(2 * x, 2 * y) + at(2 * x + 1, 2 * y) + at(2 * x, 2 * y + 1) + at(2 * x + 1, 2 * y + 1));
    }
  }
  return out;
}

struct SsimTerms {
  double ssim;
  double cs;
};

SsimTerms ssim_terms(const ScalarImage& x, const ScalarImage& y) {
  const double c1 = (0.01 * kMax) * (0.01 * kMax);
  const double c2 = (0.03 * kMax) * (0.03 * kMax);
  ScalarImage xy(x.width(), x.height()), sq(x.width(), x.height());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy[i] = x[i] * y[i];
    sq[i] = x[i] * x[i] + y[i] * y[i];
  }
  const ScalarImage mx = filter_valid(x), my = filter_valid(y), mxy = filter_valid(xy), msq = filter_valid(sq);
  double ssim = 0.0, cs = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double num0 = 2.0 * mx[i] * my[i];
    const double den0 = mx[i] * mx[i] + my[i] * my[i];
    const double luminance = (num0 + c1) / (den0 + c1);
    const double contrast = (2.0 * mxy[i] - num0 + c2) / (msq[i] - den0 + c2);
    ssim += luminance * contrast;
    cs += contrast;
  }
  const double n = static_cast<double>(mx.size());
  return {ssim / n, cs / n};
}

ScalarImage channel_255(const RgbImage& img, int c) {
  ScalarImage out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i][c] * kMax;
  return out;
}

double mean_abs(const ScalarImage& a, const ScalarImage& b) {
  require_same_shape(a, b, "mask_losses");
  if (a.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

}  // namespace

double l1_image(const RgbImage& a, const RgbImage& b, const ScalarImage* mask) {
  require_same_shape(a, b, "l1_image");
  if (mask) require_same_shape(a, *mask, "l1_image");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask && (*mask)[i] <= 0.5) continue;
    sum += (a[i] - b[i]).cwiseAbs().sum() * kMax;
    count += 3;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double mse_255(const RgbImage& a, const RgbImage& b, const ScalarImage* mask) {
  require_same_shape(a, b, "mse");
  if (mask) require_same_shape(a, *mask, "mse");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask && (*mask)[i] <= 0.5) continue;
    sum += ((a[i] - b[i]) * kMax).squaredNorm();
    count += 3;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double psnr(const RgbImage& a, const RgbImage& b, const ScalarImage* mask) {
  const double mse = mse_255(a, b, mask);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kMax * kMax / mse);
}

double ms_ssim_channel(const ScalarImage& a, const ScalarImage& b) {
  require_same_shape(a, b, "ms_ssim");
  const int min_size = (kWindow - 1) * (1 << (kScaleWeights.size() - 1)) + 1;
  if (std::min(a.width(), a.height()) < min_size) {
    throw ScaleCountError("ms_ssim: images need at least " + std::to_string(min_size) + " px per side");
  }
  ScalarImage x = a, y = b;
  double result = 1.0;
  for (std::size_t scale = 0; scale < kScaleWeights.size(); ++scale) {
    if (scale > 0) {
      x = downsample(x);
      y = downsample(y);
    }
    const SsimTerms t = ssim_terms(x, y);
    const double value = scale + 1 == kScaleWeights.size() ? t.ssim : t.cs;
    result *= std::pow(std::max(0.0, value), kScaleWeights[scale]);
  }
  return result;
}

double ms_ssim(const RgbImage& a, const RgbImage& b) {
  require_same_shape(a, b, "ms_ssim");
  double sum = 0.0;
  for (int c = 0; c < 3; ++c) sum += ms_ssim_channel(channel_255(a, c), channel_255(b, c));
  return sum / 3.0;
}

MaskLosses mask_losses(const PartMaskSet& masks, const WarpResult& warp, const ScalarImage& gt) {
  ScalarImage bg_gt(gt.width(), gt.height());
  for (std::size_t i = 0; i < gt.size(); ++i) bg_gt[i] = 1.0 - gt[i];
  return {mean_abs(masks.background, bg_gt), mean_abs(warp.part_silhouette, gt), mean_abs(warp.silhouette, gt)};
}

double weighted_mask_loss(const MaskLosses& losses, const LossConfig& cfg) {
  return cfg.w_bg * losses.bg + cfg.w_fg * losses.fg + cfg.w_fgref * losses.fgref;
}

std::vector<double> IdentityFeatures::features(const RgbImage& image) const {
  std::vector<double> f;
  f.reserve(image.size() * 3);
  for (const Rgb& c : image) f.insert(f.end(), {c.x(), c.y(), c.z()});
  return f;
}

std::vector<double> GaussianPyramidFeatures::features(const RgbImage& image) const {
  static constexpr std::array<double, 5> kTaps = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  std::vector<double> f = IdentityFeatures().features(image);
  RgbImage level = image;
  for (int l = 1; l < levels_ && level.width() > 1 && level.height() > 1; ++l) {
    const int w = level.width(), h = level.height();
    auto clampx = [w](int x) { return std::clamp(x, 0, w - 1); };
    auto clampy = [h](int y) { return std::clamp(y, 0, h - 1); };
    RgbImage rows(w, h, Rgb::Zero());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Rgb acc = Rgb::Zero();
        for (int k = -2; k <= 2; ++k) acc += kTaps[static_cast<std::size_t>(k + 2)] * level(clampx(x + k), y);
        rows(x, y) = acc;
      }
    }
    RgbImage next((w + 1) / 2, (h + 1) / 2, Rgb::Zero());
    for (int y = 0; y < next.height(); ++y) {
      for (int x = 0; x < next.width(); ++x) {
        Rgb acc = Rgb::Zero();
        for (int k = -2; k <= 2; ++k) acc += kTaps[static_cast<std::size_t>(k + 2)] * rows(2 * x, clampy(2 * y + k));
        next(x, y) = acc;
      }
    }
    level = std::move(next);
    const std::vector<double> lf = IdentityFeatures().features(level);
    f.insert(f.end(), lf.begin(), lf.end());
  }
  return f;
}

double blender_rec_loss(const RgbImage& pred, const RgbImage& gt, const FeatureExtractor& features, double w_l1) {
  require_same_shape(pred, gt, "blender_rec_loss");
  const std::vector<double> fp = features.features(pred), fg = features.features(gt);
  if (fp.size() != fg.size()) throw ContractError("blender_rec_loss: feature sizes differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) sq += (fp[i] - fg[i]) * (fp[i] - fg[i]);
  const double feature_term = fp.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(fp.size()));
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) abs_sum += (pred[i] - gt[i]).cwiseAbs().sum();
  const double l1 = pred.empty() ? 0.0 : abs_sum / static_cast<double>(3 * pred.size());
  return feature_term + w_l1 * l1;
}

}  // namespace volcap
