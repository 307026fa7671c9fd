#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "oracles/grid_similarity.hpp"
#include "oracles/metric_pairs.hpp"
#include "support.hpp"
#include "volcap/bank.hpp"
#include "volcap/blender.hpp"
#include "volcap/geometry.hpp"
#include "volcap/io.hpp"
#include "volcap/metrics.hpp"
#include "volcap/pipeline.hpp"
#include "volcap/selector.hpp"
#include "volcap/simfit.hpp"
#include "volcap/splat.hpp"
#include "volcap/warper.hpp"

using namespace volcap;
using volcap::test::Rng;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void run(int number, const char* name, double limit_seconds, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0 && seconds >= limit_seconds) {
    o.pass = false;
    o.detail += fmt("; over the %.0f s limit", limit_seconds);
  }
  failures += !o.pass;
  std::printf("[%s] criterion %d: %s (%s; %.2f s)\n", o.pass ? "PASS" : "FAIL", number, name, o.detail.c_str(),
              seconds);
  std::fflush(stdout);
}

Outcome geometry_round_trip() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Intrinsics k{rng.uniform(50, 2000), rng.uniform(50, 2000), rng.uniform(0, 1279), rng.uniform(0, 719), 1280,
                       720};
    const Vec2 p(rng.uniform(0, 1279), rng.uniform(0, 719));
    const double z = rng.uniform(0.1, 20.0);
    worst = std::max(worst, (project(backproject(p, z, k), k).pixel - p).norm());
  }
  return {worst <= 1e-9, fmt("max error %.3g px", worst)};
}

Outcome splat_self_reprojection() {
  Rng rng(102);
  double worst_fraction = 1.0;
  double worst_depth = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Frame f = test::humanoid_frame(18.0 * t, 1 + t, jitter_pose(PoseParams::standing(), 15, rng.next()));
    const Intrinsics& k = f.camera.intrinsics;
    const SplatOutput out = splat_render(depth_to_cloud(f.depth, f.color, f.mask, k), k);
    int masked = 0, exact = 0;
    for (std::size_t i = 0; i < f.mask.size(); ++i) {
      if (f.mask[i] < 0.5) continue;
      ++masked;
      const double dz = std::abs(out.depth[i] - f.depth[i]);
      const bool ok = out.color[i] == f.color[i] && dz <= 1e-6;
      exact += ok;
      if (ok) worst_depth = std::max(worst_depth, dz);
    }
    worst_fraction = std::min(worst_fraction, static_cast<double>(exact) / masked);
  }
  return {worst_fraction >= 0.995, fmt("worst frame %.4f exact, max depth error %.2g m", worst_fraction, worst_depth)};
}

Outcome similarity_fit() {
  Rng rng(103);
  auto random_points = [&](int n) {
    std::vector<Vec2> p;
    for (int i = 0; i < n; ++i) p.emplace_back(rng.uniform(-100, 100), rng.uniform(-100, 100));
    return p;
  };
  auto random_similarity = [&] {
    return Similarity2D{rng.uniform(0.3, 3.0), rng.uniform(-3.1, 3.1),
                        Vec2(rng.uniform(-50, 50), rng.uniform(-50, 50))};
  };
  double worst_gap = -1e300;
  for (int t = 0; t < 100; ++t) {
    const Similarity2D truth = random_similarity();
    const std::vector<Vec2> src = random_points(rng.integer(2, 8));
    std::vector<Vec2> dst = apply_similarity(truth, src);
    for (Vec2& p : dst) p += Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5));
    const SimilarityFit f = fit_similarity(src, dst);
    const double grid = oracle::grid_min_residual({truth.scale, truth.angle, truth.translation.x(), truth.translation.y()},
                                                  {0.1 * truth.scale, 0.1, 5.0, 5.0}, 41, src, dst);
    worst_gap = std::max(worst_gap, f.residual - grid);
  }
  double worst_param = 0.0;
  for (int n : {2, 3, 4, 8}) {
    for (int t = 0; t < 25; ++t) {
      const Similarity2D truth = random_similarity();
      const std::vector<Vec2> src = random_points(n);
      const Similarity2D got = fit_similarity(src, apply_similarity(truth, src)).transform;
      worst_param = std::max({worst_param, std::abs(got.scale - truth.scale), std::abs(got.angle - truth.angle),
                              (got.translation - truth.translation).cwiseAbs().maxCoeff()});
    }
  }
  return {worst_gap <= 1e-9 && worst_param <= 1e-9,
          fmt("max residual minus grid %.3g, max parameter error %.3g", worst_gap, worst_param)};
}

Outcome selector_accuracy() {
  std::vector<Frame> orbit;
  for (int k = 0; k < 36; ++k) orbit.push_back(test::humanoid_frame(10.0 * k));
  const CalibrationBank bank = build_bank(orbit, 36);
  if (bank.size() != 36) return {false, fmt("bank has %zu entries", bank.size())};
  Rng rng(104);
  int hits = 0;
  for (int t = 0; t < 200; ++t) {
    const double yaw = rng.uniform(0.0, 360.0);
    const Frame target = test::humanoid_frame(yaw);
    const auto kp = prepare_keypoints(target);
    if (!kp) return {false, fmt("target at %.1f deg rejected", yaw)};
    const Selection s = select(bank, *kp, {}, target.width());
    const double chosen = 10.0 * bank[s.index].source_index;
    const double diff = std::abs(std::remainder(chosen - yaw, 360.0));
    hits += diff <= 10.0;
  }
  return {hits >= 190, fmt("%d/200 within 10 deg", hits)};
}

Outcome identity_score() {
  double worst = 0.0;
  Rng rng(105);
  for (int t = 0; t < 12; ++t) {
    const Frame f = test::humanoid_frame(30.0 * t, 1, jitter_pose(PoseParams::standing(), 15, rng.next()));
    const CalibrationEntry e = CalibrationEntry::make(std::make_shared<Frame>(f), f.keypoints);
    worst = std::max(worst, std::abs(score_entry(f.keypoints, e, {}, f.width()).total - 12.0));
  }
  return {worst <= 1e-9, fmt("max |total - 12| = %.3g over 12 poses", worst)};
}

Outcome warper_identity() {
  Rng rng(106);
  double worst = 0.0;
  for (int t = 0; t < 12; ++t) {
    const Frame f = test::humanoid_frame(rng.uniform(0, 360), 1 + t, jitter_pose(PoseParams::standing(), 20, rng.next()));
    const WarpResult r =
        composite(warp_parts(f, f.keypoints, f.keypoints, part_masks_geometric(f.keypoints, f.width(), f.height())));
    for (std::size_t i = 0; i < f.mask.size(); ++i) {
      if (f.mask[i] >= 0.5) worst = std::max(worst, (r.color[i] - f.color[i]).cwiseAbs().mean());
    }
  }
  return {worst <= 0.02, fmt("max per-pixel l1 %.3g over 12 frames", worst)};
}

BlendInput random_blend_input(Rng& rng, int w, int h, double confidence, double coverage_rate) {
  BlendInput b;
  b.cloud = SplatOutput{RgbImage(w, h), DepthMap(w, h, 0.0), ScalarImage(w, h, 0.0), Image<std::int64_t>(w, h, -1)};
  b.warp.color = RgbImage(w, h);
  b.warp.silhouette = ScalarImage(w, h);
  b.warp.part_silhouette = ScalarImage(w, h);
  b.normals = NormalMap(w, h, Vec3::Zero());
  for (std::size_t i = 0; i < b.cloud.color.size(); ++i) {
    const bool covered = rng.uniform() < coverage_rate;
    b.cloud.coverage[i] = covered ? 1.0 : 0.0;
    b.cloud.depth[i] = covered ? rng.uniform(0.5, 4) : 0.0;
    b.cloud.point[i] = covered ? static_cast<std::int64_t>(i) : -1;
    b.cloud.color[i] = covered ? Rgb(rng.uniform(), rng.uniform(), rng.uniform()) : Rgb(Rgb::Zero());
    b.warp.color[i] = Rgb(rng.uniform(), rng.uniform(), rng.uniform());
    b.warp.silhouette[i] = b.warp.part_silhouette[i] = rng.uniform();
    if (covered) {
      Vec3 n = rng.unit_vector();
      n.z() = -std::abs(n.z());
      b.normals[i] = n;
    }
  }
  b.confidence = confidence;
  return b;
}

Outcome blend_limits() {
  Rng rng(107);
  BlendInput front = random_blend_input(rng, 200, 150, 1.0, 1.0);
  for (Vec3& n : front.normals) n = Vec3(0, 0, -1);
  double cloud_gap = 0.0;
  const RgbImage a = blend(front, {});
  for (std::size_t i = 0; i < a.size(); ++i) cloud_gap = std::max(cloud_gap, (a[i] - front.cloud.color[i]).cwiseAbs().maxCoeff());

  const BlendInput back = random_blend_input(rng, 200, 150, -1.0, 0.5);
  const RgbImage b = blend(back, {});
  const ScalarImage support = blend_support(back, {});
  double warp_gap = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Rgb expected = support[i] > 0 ? back.warp.color[i] : Rgb(Rgb::Zero());
    warp_gap = std::max(warp_gap, (b[i] - expected).cwiseAbs().maxCoeff());
  }

  long checked = 0, violations = 0;
  while (checked < 1000000) {
    const BlendInput r = random_blend_input(rng, 100, 100, rng.uniform(-1, 1), rng.uniform());
    const BlendConfig cfg{rng.uniform(0, 4), rng.uniform()};
    const RgbImage out = blend(r, cfg);
    const ScalarImage s = blend_support(r, cfg);
    for (std::size_t i = 0; i < out.size(); ++i) {
      ++checked;
      if (s[i] == 0.0) {
        violations += out[i] != Rgb::Zero();
        continue;
      }
      for (int c = 0; c < 3; ++c) {
        const double lo = std::min(r.cloud.color[i][c], r.warp.color[i][c]);
        const double hi = std::max(r.cloud.color[i][c], r.warp.color[i][c]);
        violations += out[i][c] < lo - 1e-15 || out[i][c] > hi + 1e-15;
      }
    }
  }
  return {cloud_gap <= 1e-6 && warp_gap == 0.0 && violations == 0,
          fmt("c=1 gap %.2g, c=-1 gap %.2g, %ld convexity violations in %ld pixels", cloud_gap, warp_gap, violations,
              checked)};
}

Outcome back_facing_ordering() {
  const CalibrationBank bank = test::orbit_bank();
  std::vector<double> improvement;
  int wins = 0;
  for (int i = 0; i < 50; ++i) {
    const test::BackFacingCase c = test::back_facing_case(500 + i);
    const RenderResult r = render_novel(c.input, bank, c.target, PipelineConfig{});
    if (r.rerender.confidence >= 0) return {false, fmt("case %d has c = %.3f", i, r.rerender.confidence)};
    const double out = test::masked_l1(r.output, c.truth.color, c.truth.mask);
    const double cloud = test::masked_l1(r.rerender.cloud.color, c.truth.color, c.truth.mask);
    wins += out < cloud;
    improvement.push_back(1.0 - out / cloud);
  }
  std::sort(improvement.begin(), improvement.end());
  const double median = 0.5 * (improvement[24] + improvement[25]);
  return {wins == 50 && median >= 0.25,
          fmt("pipeline better on %d/50, median improvement %.1f%%, worst %.1f%%", wins, 100 * median,
              100 * improvement.front())};
}

Outcome metrics_cross_check() {
  const auto pairs = oracle::metric_pairs();
  const auto& refs = oracle::metric_references();
  if (pairs.size() != 10 || refs.size() != 10) return {false, "expected 10 reference pairs"};
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    worst = std::max({worst, std::abs(l1_image(a, b) - refs[i].l1), std::abs(psnr(a, b) - refs[i].psnr),
                      std::abs(ms_ssim(a, b) - refs[i].ms_ssim)});
  }
  return {worst <= 1e-4, fmt("max deviation %.3g", worst)};
}

int shell(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome render_determinism() {
  const test::TempDir dir;
  const fs::path& d = dir.path();
  const std::string cli = VOLCAP_CLI;
  auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  if (shell(cli + " synth --out " + q(d / "seq") + " --frames 36 --orbit-degrees 10 --seed 3 --pose-jitter 8") ||
      shell(cli + " calibrate --seq " + q(d / "seq") + " --out " + q(d / "bank") + " --max-frames 36") ||
      shell(cli + " synth --out " + q(d / "in") + " --frames 1 --seed 3 --start-degrees 4 --pose-jitter 8")) {
    return {false, "could not prepare inputs with the CLI"};
  }
  save_camera(orbit_camera(165.0), d / "camera.json");
  const std::vector<unsigned> threads{1, 4, 4, 0};
  for (std::size_t i = 0; i < threads.size(); ++i) {
    const std::string tag = std::to_string(i);
    if (shell(cli + " --threads " + std::to_string(threads[i]) + " render --frame " + q(d / "in" / "0000") +
              " --bank " + q(d / "bank") + " --camera " + q(d / "camera.json") + " --out " + q(d / ("out" + tag)) +
              " --dump " + q(d / ("dump" + tag)))) {
      return {false, "render run " + tag + " failed"};
    }
  }
  int compared = 0;
  for (const char* sub : {"out", "dump"}) {
    for (const auto& e : fs::directory_iterator(d / (std::string(sub) + "0"))) {
      const std::string first = test::read_bytes(e.path());
      for (std::size_t i = 1; i < threads.size(); ++i) {
        const fs::path other = d / (sub + std::to_string(i)) / e.path().filename();
        if (!fs::exists(other) || test::read_bytes(other) != first) {
          return {false, "differs: " + other.filename().string() + " in run " + std::to_string(i)};
        }
        ++compared;
      }
    }
  }
  return {compared > 0, fmt("%d file comparisons over 4 runs with 1, 4, 4 and auto threads", compared)};
}

}  // namespace

int main() {
  run(1, "project/backproject round trip", 1.0, geometry_round_trip);
  run(2, "splat self-reprojection", 5.0, splat_self_reprojection);
  run(3, "similarity fit optimality and exact recovery", 0, similarity_fit);
  run(4, "selector viewpoint accuracy", 10.0, selector_accuracy);
  run(5, "identity score equals 12", 0, identity_score);
  run(6, "warper identity", 0, warper_identity);
  run(7, "blend limits and convexity", 0, blend_limits);
  run(8, "back-facing ordering against I_cloud", 120.0, back_facing_ordering);
  run(9, "metrics match the reference", 0, metrics_cross_check);
  run(10, "render determinism", 0, render_determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
