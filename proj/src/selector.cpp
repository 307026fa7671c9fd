#include "volcap/selector.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "volcap/simfit.hpp"

namespace volcap {

void SelectorWeights::validate() const {
  if (w_head < 0.0 || w_torso < 0.0 || w_sim < 0.0) throw ContractError("selector weights must be non-negative");
  if (w_head == 0.0 && w_torso == 0.0 && w_sim == 0.0) throw ContractError("selector weights are all zero");
  if (sigma_s && !(*sigma_s > 0.0)) throw ContractError("selector sigma_s must be positive");
}

CalibrationEntry CalibrationEntry::make(std::shared_ptr<const Frame> frame, KeypointSet keypoints, int source_index) {
  CalibrationEntry e;
  e.frame = std::move(frame);
  e.keypoints = std::move(keypoints);
  e.source_index = source_index;
  try {
    e.head_dir = head_direction(e.keypoints);
    e.torso_dir = torso_direction(e.keypoints);
    e.directions_valid = true;
  } catch (const DegenerateError&) {
    e.directions_valid = false;
  }
  return e;
}

std::array<Joint, 2> limb_joints(Limb limb) {
  switch (limb) {
    case Limb::LeftArm: return {Joint::LeftElbow, Joint::LeftWrist};
    case Limb::RightArm: return {Joint::RightElbow, Joint::RightWrist};
    case Limb::LeftLeg: return {Joint::LeftKnee, Joint::LeftAnkle};
    case Limb::RightLeg: return {Joint::RightKnee, Joint::RightAnkle};
  }
  return {};
}

ScoreBreakdown score_entry(const KeypointSet& target, const CalibrationEntry& entry, const SelectorWeights& w,
                           int width) {
  ScoreBreakdown b;
  if (!entry.directions_valid) {
    b.total = -std::numeric_limits<double>::infinity();
    return b;
  }
  try {
    b.s_head = head_direction(target).dot(entry.head_dir);
    b.s_torso = torso_direction(target).dot(entry.torso_dir);
  } catch (const DegenerateError&) {
    b.total = -std::numeric_limits<double>::infinity();
    return b;
  }

  // The limb pair fixes the transform; the residual is measured over every
  // joint visible in both poses, since a 2-point fit is always exact.
  std::vector<Vec2> all_src, all_dst;
  for (int i = 0; i < kNumJoints; ++i) {
    if (target.at(i).valid && entry.keypoints.at(i).valid) {
      all_src.push_back(entry.keypoints.at(i).position2d);
      all_dst.push_back(target.at(i).position2d);
    }
  }
  const double sigma = w.sigma_s.value_or(default_similarity_sigma(width));
  for (int l = 0; l < kNumLimbs; ++l) {
    const auto joints = limb_joints(static_cast<Limb>(l));
    std::array<Vec2, 2> src, dst;
    bool present = true;
    for (std::size_t j = 0; j < joints.size(); ++j) {
      if (!target.valid(joints[j]) || !entry.keypoints.valid(joints[j])) {
        present = false;
        break;
      }
      src[j] = entry.keypoints.p2(joints[j]);
      dst[j] = target.p2(joints[j]);
    }
    double score = 0.0;
    if (present) {
      try {
        const Similarity2D t = fit_similarity(src, dst).transform;
        score = similarity_score(similarity_residual(t, all_src, all_dst), sigma);
      } catch (const DegenerateError&) {
        score = 0.0;
      }
    }
    b.s_sim_per_limb[static_cast<std::size_t>(l)] = score;
    b.s_sim += score;
  }
  b.total = w.w_head * b.s_head + w.w_torso * b.s_torso + w.w_sim * b.s_sim;
  return b;
}

Selection select(const CalibrationBank& bank, const KeypointSet& target, const SelectorWeights& w, int width) {
  if (bank.empty()) throw EmptyBankError("select: calibration bank is empty");
  w.validate();
  Selection best;
  best.breakdown.total = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const ScoreBreakdown b = score_entry(target, bank[i], w, width);
    if (!found || b.total > best.breakdown.total) {
      best = {i, b};
      found = true;
    }
  }
  if (std::isinf(best.breakdown.total)) throw DegenerateError("select: no calibration entry could be scored");
  return best;
}

}  // namespace volcap
