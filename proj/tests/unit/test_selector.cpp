#include <gtest/gtest.h>

#include <complex>

#include "support.hpp"
#include "volcap/error.hpp"
#include "volcap/selector.hpp"
#include "volcap/simfit.hpp"

using namespace volcap;
using volcap::test::Rng;

namespace {

CalibrationEntry entry_from(const Frame& f, int index = 0) {
  return CalibrationEntry::make(std::make_shared<Frame>(f), f.keypoints, index);
}

CalibrationBank bank_at_yaws(const std::vector<double>& yaws) {
  std::vector<CalibrationEntry> entries;
  for (std::size_t i = 0; i < yaws.size(); ++i) {
    entries.push_back(entry_from(volcap::test::humanoid_frame(yaws[i]), static_cast<int>(i)));
  }
  return CalibrationBank(std::move(entries));
}

// Independent evaluation of the score: frames from explicit cross products,
// 2-point similarity from the complex ratio of the limb vectors.
double oracle_total(const KeypointSet& target, const KeypointSet& calib, double wh, double wt, double ws,
                    double sigma) {
  auto forward = [](const Vec3& l, const Vec3& r, const Vec3& from, const Vec3& to) {
    return (r - l).normalized().cross((to - from).normalized()).normalized();
  };
  auto head = [&](const KeypointSet& k) {
    return forward(k.p3(Joint::LeftEye), k.p3(Joint::RightEye),
                   0.5 * (k.p3(Joint::LeftEye) + k.p3(Joint::RightEye)), k.p3(Joint::Nose));
  };
  auto torso = [&](const KeypointSet& k) {
    return forward(k.p3(Joint::LeftShoulder), k.p3(Joint::RightShoulder), k.p3(Joint::LeftHip),
                   0.5 * (k.p3(Joint::LeftShoulder) + k.p3(Joint::RightShoulder)));
  };
  using C = std::complex<double>;
  auto c = [](const Vec2& v) { return C(v.x(), v.y()); };
  double sim = 0.0;
  const Joint limbs[4][2] = {{Joint::LeftElbow, Joint::LeftWrist},
                             {Joint::RightElbow, Joint::RightWrist},
                             {Joint::LeftKnee, Joint::LeftAnkle},
                             {Joint::RightKnee, Joint::RightAnkle}};
  for (const auto& limb : limbs) {
    if (!target.valid(limb[0]) || !target.valid(limb[1]) || !calib.valid(limb[0]) || !calib.valid(limb[1])) continue;
    const C a = c(calib.p2(limb[0])), b = c(calib.p2(limb[1]));
    const C z = (c(target.p2(limb[1])) - c(target.p2(limb[0]))) / (b - a);
    const C t = c(target.p2(limb[0])) - z * a;
    double sum = 0.0;
    int n = 0;
    for (int i = 0; i < kNumJoints; ++i) {
      if (!target.at(i).valid || !calib.at(i).valid) continue;
      sum += std::norm(z * c(calib.at(i).position2d) + t - c(target.at(i).position2d));
      ++n;
    }
    sim += std::exp(-sigma * std::sqrt(sum / n));
  }
  return wh * head(target).dot(head(calib)) + wt * torso(target).dot(torso(calib)) + ws * sim;
}

KeypointSet planar_pose(double facing) {
  // Face and torso in a plane z = 3 (facing = -1) or mirrored to face away (+1).
  KeypointSet kp;
  auto put = [&](Joint j, double x, double y) { kp.set(j, Vec2(x, y), Vec3(facing * x, y, 3.0)); };
  put(Joint::Nose, 0, -0.70);
  put(Joint::LeftEye, 0.03, -0.74);
  put(Joint::RightEye, -0.03, -0.74);
  put(Joint::LeftShoulder, 0.18, -0.48);
  put(Joint::RightShoulder, -0.18, -0.48);
  put(Joint::LeftHip, 0.1, 0);
  put(Joint::RightHip, -0.1, 0);
  put(Joint::LeftElbow, 0.3, -0.3);
  put(Joint::LeftWrist, 0.35, -0.1);
  return kp;
}

}  // namespace

TEST(SelectorWeights, Defaults) {
  const SelectorWeights w;
  EXPECT_EQ(w.w_head, 5.0);
  EXPECT_EQ(w.w_torso, 3.0);
  EXPECT_EQ(w.w_sim, 1.0);
  EXPECT_FALSE(w.sigma_s.has_value());
  EXPECT_NO_THROW(w.validate());
  EXPECT_THROW((SelectorWeights{0, 0, 0, {}}.validate()), ContractError);
  EXPECT_THROW((SelectorWeights{-1, 1, 1, {}}.validate()), ContractError);
  EXPECT_THROW((SelectorWeights{1, 1, 1, 0.0}.validate()), ContractError);
}

TEST(CalibrationEntry, CachedDirectionsMatchRecomputation) {
  const CalibrationEntry e = entry_from(volcap::test::humanoid_frame(40));
  ASSERT_TRUE(e.directions_valid);
  EXPECT_LT((e.head_dir - head_direction(e.keypoints)).norm(), 1e-9);
  EXPECT_LT((e.torso_dir - torso_direction(e.keypoints)).norm(), 1e-9);
}

TEST(ScoreEntry, IdentityScoresTwelve) {
  const Frame f = volcap::test::humanoid_frame(25);
  const ScoreBreakdown b = score_entry(f.keypoints, entry_from(f), SelectorWeights{}, f.width());
  EXPECT_NEAR(b.s_head, 1.0, 1e-12);
  EXPECT_NEAR(b.s_torso, 1.0, 1e-12);
  EXPECT_NEAR(b.s_sim, 4.0, 1e-12);
  EXPECT_NEAR(b.total, 12.0, 1e-9);
}

TEST(ScoreEntry, OppositeFacing) {
  const KeypointSet front = planar_pose(1.0), back = planar_pose(-1.0);
  const CalibrationEntry e = CalibrationEntry::make(nullptr, back);
  const ScoreBreakdown b = score_entry(front, e, SelectorWeights{}, 320);
  EXPECT_NEAR(b.s_head, -1.0, 1e-12);
  EXPECT_NEAR(b.s_torso, -1.0, 1e-12);
}

TEST(ScoreEntry, MissingLimbContributesZero) {
  const Frame f = volcap::test::humanoid_frame(10);
  KeypointSet target = f.keypoints;
  target[Joint::LeftWrist] = Keypoint{};
  const ScoreBreakdown b = score_entry(target, entry_from(f), SelectorWeights{}, f.width());
  EXPECT_EQ(b.s_sim_per_limb[static_cast<int>(Limb::LeftArm)], 0.0);
  EXPECT_NEAR(b.s_sim, 3.0, 1e-12);
}

TEST(ScoreEntry, LimbScoreReflectsPoseDifference) {
  PoseParams raised = PoseParams::standing();
  raised.shoulder_down[0] = 0.0;
  const Frame a = volcap::test::humanoid_frame(0), b = volcap::test::humanoid_frame(0, 1, raised);
  const ScoreBreakdown s = score_entry(b.keypoints, entry_from(a), SelectorWeights{}, a.width());
  EXPECT_LT(s.s_sim_per_limb[static_cast<int>(Limb::LeftArm)], 0.5);
  EXPECT_GT(s.s_sim_per_limb[static_cast<int>(Limb::RightArm)], s.s_sim_per_limb[static_cast<int>(Limb::LeftArm)]);
}

TEST(ScoreEntry, DegenerateEntryScoresMinusInfinity) {
  KeypointSet kp = volcap::test::humanoid_frame(0).keypoints;
  kp.set(Joint::RightEye, kp.p2(Joint::LeftEye), kp.p3(Joint::LeftEye));
  const CalibrationEntry e = CalibrationEntry::make(nullptr, kp);
  EXPECT_FALSE(e.directions_valid);
  EXPECT_EQ(score_entry(volcap::test::humanoid_frame(0).keypoints, e, SelectorWeights{}, 320).total,
            -std::numeric_limits<double>::infinity());
}

TEST(ScoreEntry, MatchesIndependentRescoring) {
  Rng rng(41);
  for (int t = 0; t < 60; ++t) {
    const Frame a = volcap::test::humanoid_frame(rng.uniform(0, 360), 1,
                                                 jitter_pose(PoseParams::standing(), 25, rng.next()));
    const Frame b = volcap::test::humanoid_frame(rng.uniform(0, 360), 1,
                                                 jitter_pose(PoseParams::standing(), 25, rng.next()));
    const SelectorWeights w{rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0.1, 3), rng.uniform(0.01, 0.5)};
    const double got = score_entry(b.keypoints, entry_from(a), w, 320).total;
    ASSERT_NEAR(got, oracle_total(b.keypoints, a.keypoints, w.w_head, w.w_torso, w.w_sim, *w.sigma_s), 1e-9);
  }
}

TEST(ScoreEntry, DirectionScoresScaleInvariant) {
  Rng rng(42);
  const Frame a = volcap::test::humanoid_frame(30), b = volcap::test::humanoid_frame(75);
  for (int t = 0; t < 20; ++t) {
    const double s = rng.uniform(0.1, 10);
    KeypointSet scaled;
    for (int i = 0; i < kNumJoints; ++i) {
      const auto j = static_cast<Joint>(i);
      scaled.set(j, b.keypoints.p2(j), s * b.keypoints.p3(j));
    }
    const ScoreBreakdown x = score_entry(b.keypoints, entry_from(a), {}, 320);
    const ScoreBreakdown y = score_entry(scaled, entry_from(a), {}, 320);
    ASSERT_NEAR(x.s_head, y.s_head, 1e-9);
    ASSERT_NEAR(x.s_torso, y.s_torso, 1e-9);
  }
}

TEST(Select, BankOfOne) {
  const CalibrationBank bank = bank_at_yaws({123});
  EXPECT_EQ(select(bank, volcap::test::humanoid_frame(0).keypoints, {}, 320).index, 0u);
}

TEST(Select, EmptyBankThrows) {
  EXPECT_THROW(select(CalibrationBank{}, volcap::test::humanoid_frame(0).keypoints, {}, 320), EmptyBankError);
}

TEST(Select, AllDegenerateThrows) {
  KeypointSet kp = volcap::test::humanoid_frame(0).keypoints;
  kp.set(Joint::RightEye, kp.p2(Joint::LeftEye), kp.p3(Joint::LeftEye));
  const CalibrationBank bank({CalibrationEntry::make(nullptr, kp)});
  EXPECT_THROW(select(bank, volcap::test::humanoid_frame(0).keypoints, {}, 320), DegenerateError);
}

TEST(Select, QuarterTurnBank) {
  const CalibrationBank bank = bank_at_yaws({0, 90, 180, 270});
  const KeypointSet target = volcap::test::humanoid_frame(85).keypoints;
  const Selection s = select(bank, target, {}, 320);
  EXPECT_EQ(s.index, 1u);
  std::size_t best = 0;
  double best_total = -1e300;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const double v = oracle_total(target, bank[i].keypoints, 5, 3, 1, default_similarity_sigma(320));
    if (v > best_total) best_total = v, best = i;
  }
  EXPECT_EQ(best, s.index);
}

TEST(Select, TieGoesToLowerIndexAndPermutationInvariant) {
  const CalibrationBank dup = bank_at_yaws({180, 40, 40, 300});
  EXPECT_EQ(select(dup, volcap::test::humanoid_frame(42).keypoints, {}, 320).index, 1u);
  Rng rng(43);
  const std::vector<double> yaws{0, 50, 100, 150, 200, 250, 300};
  const CalibrationBank bank = bank_at_yaws(yaws);
  for (int t = 0; t < 10; ++t) {
    std::vector<std::size_t> order(yaws.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.next() % (i + 1)]);
    std::vector<CalibrationEntry> shuffled;
    for (std::size_t i : order) shuffled.push_back(bank[i]);
    const KeypointSet target = volcap::test::humanoid_frame(rng.uniform(0, 360)).keypoints;
    const std::size_t a = select(bank, target, {}, 320).index;
    const std::size_t b = select(CalibrationBank(shuffled), target, {}, 320).index;
    ASSERT_EQ(bank[a].source_index, shuffled[b].source_index);
  }
}

TEST(Select, PositiveWeightScalingKeepsArgmax) {
  Rng rng(44);
  const CalibrationBank bank = bank_at_yaws({0, 45, 90, 135, 180, 225, 270, 315});
  for (int t = 0; t < 20; ++t) {
    const KeypointSet target = volcap::test::humanoid_frame(rng.uniform(0, 360)).keypoints;
    const SelectorWeights w{rng.uniform(0.1, 5), rng.uniform(0.1, 5), rng.uniform(0.1, 5), 0.2};
    const double k = rng.uniform(0.01, 100);
    const SelectorWeights scaled{k * w.w_head, k * w.w_torso, k * w.w_sim, 0.2};
    ASSERT_EQ(select(bank, target, w, 320).index, select(bank, target, scaled, 320).index);
  }
}
