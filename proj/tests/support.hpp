#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>
#include <numbers>

#include "volcap/bank.hpp"
#include "volcap/frame.hpp"
#include "volcap/synth.hpp"

namespace volcap::test {

// splitmix64. Shared with tests/oracles/metrics_reference.py, which must
// generate the same streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  Vec3 unit_vector() {
    for (;;) {
      const Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
      if (v.norm() > 0.1 && v.norm() <= 1.0) return v.normalized();
    }
  }
  RigidTransform rigid(double max_translation = 2.0) {
    return RigidTransform::from_axis_angle(unit_vector(), uniform(-std::numbers::pi, std::numbers::pi),
                                           Vec3(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)) * max_translation);
  }

 private:
  std::uint64_t state_;
};

inline Intrinsics make_intrinsics(int width, int height, double f) {
  return {f, f, (width - 1) / 2.0, (height - 1) / 2.0, width, height};
}

inline Frame humanoid_frame(double camera_yaw, std::uint64_t seed = 1, const PoseParams& pose = PoseParams::standing()) {
  return render_synthetic(make_humanoid(pose, seed), orbit_camera(camera_yaw));
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("volcap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One subject: a 36-frame orbit bank in jittered poses, and back-facing
// targets rendered from frontal inputs in poses the bank never saw.
struct BackFacingCase {
  Frame input;
  Camera target;
  Frame truth;
};

inline constexpr std::uint64_t kSubjectSeed = 7;

inline CalibrationBank orbit_bank(int width = 320, int height = 256) {
  std::vector<Frame> seq;
  for (int k = 0; k < 36; ++k) {
    const Humanoid h = make_humanoid(jitter_pose(PoseParams::standing(), 8.0, 2000 + k), kSubjectSeed);
    seq.push_back(render_synthetic(h, orbit_camera(5.0 + 10.0 * k, 3.0, width, height)));
  }
  return build_bank(seq, 36);
}

inline BackFacingCase back_facing_case(std::uint64_t seed, int width = 320, int height = 256) {
  Rng rng(seed);
  const Humanoid h = make_humanoid(jitter_pose(PoseParams::standing(), 8.0, 1000 + seed), kSubjectSeed);
  const Camera in_cam = orbit_camera(rng.uniform(-20.0, 20.0), 3.0, width, height);
  const Camera target = orbit_camera(rng.uniform(110.0, 250.0), 3.0, width, height);
  return {render_synthetic(h, in_cam), target, render_synthetic(h, target)};
}

// Mean absolute difference over the mask, on the 0..255 scale.
inline double masked_l1(const RgbImage& a, const RgbImage& b, const ScalarImage& mask) {
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mask[i] < 0.5) continue;
    sum += (a[i] - b[i]).cwiseAbs().sum() / 3.0;
    count += 1.0;
  }
  return count > 0 ? 255.0 * sum / count : 0.0;
}

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace volcap::test
