#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "volcap/frame.hpp"
#include "volcap/pose.hpp"

namespace volcap {

struct SelectorWeights {
  double w_head = 5.0;
  double w_torso = 3.0;
  double w_sim = 1.0;
  // Limb similarity sharpness, per pixel of residual. Empty selects the
  // width-scaled default.
  std::optional<double> sigma_s;

  void validate() const;
};

struct CalibrationEntry {
  std::shared_ptr<const Frame> frame;
  KeypointSet keypoints;  // 2D + 3D in the entry's camera frame
  Vec3 head_dir = Vec3::Zero();
  Vec3 torso_dir = Vec3::Zero();
  bool directions_valid = false;
  int source_index = 0;  // position in the originating sequence

  // Computes the cached directions from the keypoints.
  static CalibrationEntry make(std::shared_ptr<const Frame> frame, KeypointSet keypoints, int source_index = 0);
};

// Immutable after construction.
class CalibrationBank {
 public:
  CalibrationBank() = default;
  explicit CalibrationBank(std::vector<CalibrationEntry> entries) : entries_(std::move(entries)) {}

  const std::vector<CalibrationEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const CalibrationEntry& operator[](std::size_t i) const { return entries_.at(i); }

 private:
  std::vector<CalibrationEntry> entries_;
};

// Arm (elbow, wrist) and leg (knee, ankle) groups scored by limb similarity.
enum class Limb : int { LeftArm = 0, RightArm, LeftLeg, RightLeg };
inline constexpr int kNumLimbs = 4;
std::array<Joint, 2> limb_joints(Limb limb);

struct ScoreBreakdown {
  double s_head = 0.0;
  double s_torso = 0.0;
  std::array<double, kNumLimbs> s_sim_per_limb{};
  double s_sim = 0.0;
  double total = 0.0;
};

// Head and torso terms are dot products of the direction frames. Each limb
// term fits a similarity to the limb's two 2D keypoints (calibration onto
// target) and scores exp(-sigma_s * RMS residual) of that transform over all
// joints valid in both poses; a limb missing on either side scores 0.
// Entries or targets without direction frames total -infinity.
// width: target image width, used when weights.sigma_s is unset.
ScoreBreakdown score_entry(const KeypointSet& target, const CalibrationEntry& entry, const SelectorWeights& w,
                           int width);

struct Selection {
  std::size_t index = 0;
  ScoreBreakdown breakdown;
};

// Highest total wins; ties go to the lower index.
Selection select(const CalibrationBank& bank, const KeypointSet& target, const SelectorWeights& w, int width);

}  // namespace volcap
