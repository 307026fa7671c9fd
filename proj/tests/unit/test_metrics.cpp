#include <gtest/gtest.h>

#include "oracles/metric_pairs.hpp"
#include "support.hpp"
#include "volcap/error.hpp"
#include "volcap/metrics.hpp"

using namespace volcap;
using volcap::test::Rng;

namespace {

RgbImage random_image(Rng& rng, int w, int h) {
  RgbImage img(w, h);
  for (Rgb& c : img) c = Rgb(rng.uniform(), rng.uniform(), rng.uniform());
  return img;
}

ScalarImage random_mask(Rng& rng, int w, int h, bool binary) {
  ScalarImage m(w, h);
  for (double& v : m) v = binary ? (rng.uniform() < 0.5 ? 0.0 : 1.0) : rng.uniform();
  return m;
}

ScalarImage flipped(const ScalarImage& m) {
  ScalarImage out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) out(m.width() - 1 - x, y) = m(x, y);
  }
  return out;
}

}  // namespace

TEST(L1, Examples) {
  Rng rng(71);
  const RgbImage a = random_image(rng, 20, 10);
  EXPECT_EQ(l1_image(a, a), 0.0);
  RgbImage b(20, 10, Rgb::Constant(0.5)), c(20, 10, Rgb::Constant(0.5 + 10.0 / 255.0));
  EXPECT_NEAR(l1_image(b, c), 10.0, 1e-9);
  EXPECT_THROW(l1_image(a, RgbImage(19, 10)), ShapeError);
}

TEST(L1, MaskedMatchesPerPixelOracle) {
  Rng rng(72);
  for (int t = 0; t < 20; ++t) {
    const RgbImage a = random_image(rng, 31, 17), b = random_image(rng, 31, 17);
    const ScalarImage m = random_mask(rng, 31, 17, false);
    double sum = 0.0, sum_masked = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        const double d = std::abs(255.0 * a[i][c] - 255.0 * b[i][c]);
        sum += d;
        if (m[i] > 0.5) sum_masked += d;
      }
      n += m[i] > 0.5;
    }
    ASSERT_NEAR(l1_image(a, b), sum / (3.0 * a.size()), 1e-9);
    ASSERT_NEAR(l1_image(a, b, &m), sum_masked / (3.0 * n), 1e-9);
    ASSERT_EQ(l1_image(a, b), l1_image(b, a));
  }
  const RgbImage a = random_image(rng, 4, 4);
  const ScalarImage none(4, 4, 0.0);
  EXPECT_EQ(l1_image(a, random_image(rng, 4, 4), &none), 0.0);
}

TEST(Psnr, Examples) {
  Rng rng(73);
  const RgbImage a = random_image(rng, 16, 16);
  EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
  const RgbImage b(8, 8, Rgb::Constant(0.2)), c(8, 8, Rgb::Constant(0.3));
  EXPECT_NEAR(psnr(b, c), 20.0, 1e-9);
}

TEST(Psnr, StrictlyDecreasingInMse) {
  const RgbImage base(8, 8, Rgb::Constant(0.5));
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double p = psnr(base, RgbImage(8, 8, Rgb::Constant(0.5 + k / 255.0 / 2)));
    ASSERT_LT(p, prev);
    prev = p;
  }
}

TEST(MsSsim, IdenticalAndSymmetric) {
  Rng rng(74);
  const RgbImage a = random_image(rng, 170, 165), b = random_image(rng, 170, 165);
  EXPECT_NEAR(ms_ssim(a, a), 1.0, 1e-12);
  EXPECT_NEAR(ms_ssim(a, b), ms_ssim(b, a), 1e-12);
  EXPECT_GE(ms_ssim(a, b), 0.0);
}

TEST(MsSsim, TooSmallThrows) {
  EXPECT_THROW(ms_ssim(RgbImage(160, 200), RgbImage(160, 200)), ScaleCountError);
  EXPECT_THROW(ms_ssim_channel(ScalarImage(200, 100), ScalarImage(200, 100)), ScaleCountError);
}

TEST(Metrics, MatchFrozenReference) {
  const auto pairs = oracle::metric_pairs();
  const auto& refs = oracle::metric_references();
  ASSERT_EQ(pairs.size(), refs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    ASSERT_EQ(a.width(), refs[i].width);
    ASSERT_EQ(a.height(), refs[i].height);
    EXPECT_NEAR(l1_image(a, b), refs[i].l1, 1e-4) << "pair " << i;
    EXPECT_NEAR(psnr(a, b), refs[i].psnr, 1e-4) << "pair " << i;
    EXPECT_NEAR(ms_ssim(a, b), refs[i].ms_ssim, 1e-4) << "pair " << i;
  }
}

TEST(MaskLosses, Examples) {
  const int w = 6, h = 4;
  PartMaskSet masks;
  WarpResult warp;
  for (auto& p : masks.parts) p = ScalarImage(w, h, 0.0);
  masks.parts[0] = ScalarImage(w, h, 1.0);
  masks.background = ScalarImage(w, h, 0.0);
  warp.part_silhouette = ScalarImage(w, h, 1.0);
  warp.silhouette = ScalarImage(w, h, 1.0);
  const MaskLosses perfect = mask_losses(masks, warp, ScalarImage(w, h, 1.0));
  EXPECT_EQ(perfect.bg, 0.0);
  EXPECT_EQ(perfect.fg, 0.0);
  EXPECT_EQ(perfect.fgref, 0.0);
  masks.background = ScalarImage(w, h, 1.0);
  const MaskLosses worst = mask_losses(masks, warp, ScalarImage(w, h, 0.0));
  EXPECT_EQ(worst.bg, 0.0);
  EXPECT_EQ(worst.fg, 1.0);
  EXPECT_EQ(worst.fgref, 1.0);
  masks.background = ScalarImage(w, h, 0.0);
  EXPECT_EQ(mask_losses(masks, warp, ScalarImage(w, h, 0.0)).bg, 1.0);
  EXPECT_THROW(mask_losses(masks, warp, ScalarImage(w + 1, h, 0.0)), ShapeError);
}

TEST(MaskLosses, RandomOracleAndFlipInvariance) {
  Rng rng(75);
  for (int t = 0; t < 10; ++t) {
    const int w = 23, h = 11;
    PartMaskSet masks;
    for (auto& p : masks.parts) p = ScalarImage(w, h, 0.0);
    masks.background = random_mask(rng, w, h, false);
    WarpResult warp;
    warp.part_silhouette = random_mask(rng, w, h, false);
    warp.silhouette = random_mask(rng, w, h, true);
    const ScalarImage gt = random_mask(rng, w, h, true);
    double bg = 0, fg = 0, fgref = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      bg += std::abs(masks.background[i] - (1.0 - gt[i]));
      fg += std::abs(warp.part_silhouette[i] - gt[i]);
      fgref += std::abs(warp.silhouette[i] - gt[i]);
    }
    const MaskLosses l = mask_losses(masks, warp, gt);
    ASSERT_NEAR(l.bg, bg / gt.size(), 1e-12);
    ASSERT_NEAR(l.fg, fg / gt.size(), 1e-12);
    ASSERT_NEAR(l.fgref, fgref / gt.size(), 1e-12);

    PartMaskSet fm = masks;
    fm.background = flipped(masks.background);
    WarpResult fw = warp;
    fw.part_silhouette = flipped(warp.part_silhouette);
    fw.silhouette = flipped(warp.silhouette);
    const MaskLosses f = mask_losses(fm, fw, flipped(gt));
    ASSERT_NEAR(f.bg, l.bg, 1e-12);
    ASSERT_NEAR(f.fg, l.fg, 1e-12);
    ASSERT_NEAR(f.fgref, l.fgref, 1e-12);
  }
}

TEST(WeightedMaskLoss, Sum) {
  const MaskLosses l{0.1, 0.2, 0.3};
  EXPECT_NEAR(weighted_mask_loss(l, LossConfig{}), 0.6, 1e-15);
  EXPECT_NEAR(weighted_mask_loss(l, LossConfig{2.0, 0.0, 1.0, 1.0, 0.01}), 0.5, 1e-15);
  EXPECT_EQ(LossConfig{}.w_l1, 0.01);
}

TEST(BlenderRecLoss, Examples) {
  Rng rng(76);
  const RgbImage a = random_image(rng, 40, 24);
  EXPECT_EQ(blender_rec_loss(a, a, GaussianPyramidFeatures{}), 0.0);
  const RgbImage b(40, 24, Rgb::Constant(0.3)), c(40, 24, Rgb::Constant(0.35));
  EXPECT_NEAR(blender_rec_loss(b, c, IdentityFeatures{}), 0.05 + 0.01 * 0.05, 1e-12);
  EXPECT_NEAR(blender_rec_loss(b, c, IdentityFeatures{}, 0.5), 0.05 + 0.5 * 0.05, 1e-12);
}

TEST(BlenderRecLoss, MonotoneAlongLinearPath) {
  Rng rng(77);
  const RgbImage gt = random_image(rng, 48, 32), start = random_image(rng, 48, 32);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 20; ++k) {
    const double t = k / 20.0;
    RgbImage p(48, 32);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = (1 - t) * start[i] + t * gt[i];
    const double loss = blender_rec_loss(p, gt, GaussianPyramidFeatures{});
    ASSERT_LE(loss, prev + 1e-15);
    prev = loss;
  }
  EXPECT_NEAR(prev, 0.0, 1e-15);
}

TEST(GaussianPyramid, LevelSizes) {
  const RgbImage img(40, 24, Rgb::Constant(0.25));
  const std::vector<double> f = GaussianPyramidFeatures(3).features(img);
  EXPECT_EQ(f.size(), 3u * (40 * 24 + 20 * 12 + 10 * 6));
  for (double v : f) ASSERT_NEAR(v, 0.25, 1e-12);
  EXPECT_EQ(IdentityFeatures().features(img).size(), 3u * 40 * 24);
}
