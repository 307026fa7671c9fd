#include "volcap/bank.hpp"

#include <cstdio>

#include "volcap/io.hpp"

namespace volcap {

using nlohmann::json;

std::optional<KeypointSet> prepare_keypoints(const Frame& frame) {
  KeypointSet kp = frame.keypoints;
  const KeypointSet lifted = lift_keypoints(kp, frame.depth, frame.camera.intrinsics);
  for (int i = 0; i < kNumJoints; ++i) {
    if (kp.at(i).valid && !kp.at(i).position3d) kp.at(i).position3d = lifted.at(i).position3d;
  }
  return extrapolate_missing(kp);
}

std::vector<std::size_t> uniform_subsample(std::size_t count, std::size_t max_frames) {
  std::vector<std::size_t> idx;
  if (max_frames == 0) return idx;
  if (count <= max_frames) {
    for (std::size_t i = 0; i < count; ++i) idx.push_back(i);
    return idx;
  }
  for (std::size_t i = 0; i < max_frames; ++i) idx.push_back(i * count / max_frames);
  return idx;
}

namespace {

CalibrationBank assemble(std::vector<std::pair<std::shared_ptr<const Frame>, int>> frames, std::size_t max_frames) {
  std::vector<CalibrationEntry> accepted;
  for (auto& [frame, source] : frames) {
    auto kp = prepare_keypoints(*frame);
    if (!kp) continue;
    accepted.push_back(CalibrationEntry::make(frame, std::move(*kp), source));
  }
  if (accepted.empty()) throw EmptyBankError("build_bank: no frame passed keypoint gating");
  std::vector<CalibrationEntry> kept;
  for (std::size_t i : uniform_subsample(accepted.size(), max_frames)) kept.push_back(accepted[i]);
  return CalibrationBank(std::move(kept));
}

json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

CalibrationBank build_bank(const std::vector<Frame>& sequence, std::size_t max_frames) {
  std::vector<std::pair<std::shared_ptr<const Frame>, int>> frames;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    frames.emplace_back(std::make_shared<const Frame>(sequence[i]), static_cast<int>(i));
  }
  return assemble(std::move(frames), max_frames);
}

CalibrationBank build_bank(const std::filesystem::path& sequence_dir, std::size_t max_frames) {
  std::vector<std::pair<std::shared_ptr<const Frame>, int>> frames;
  int i = 0;
  for (const auto& dir : list_frame_dirs(sequence_dir)) {
    frames.emplace_back(std::make_shared<const Frame>(load_frame(dir)), i++);
  }
  return assemble(std::move(frames), max_frames);
}

void save_bank(const CalibrationBank& bank, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "frames");
  json entries = json::array();
  for (std::size_t i = 0; i < bank.size(); ++i) {
    const CalibrationEntry& e = bank[i];
    char name[32];
    std::snprintf(name, sizeof name, "%04zu", i);
    const std::string rel = std::string("frames/") + name;
    save_frame(*e.frame, dir / rel);
    json entry = {{"frame", rel},
                  {"source_index", e.source_index},
                  {"keypoints", keypoints_to_json(e.keypoints)},
                  {"directions_valid", e.directions_valid}};
    if (e.directions_valid) {
      entry["head_dir"] = vec_json(e.head_dir);
      entry["torso_dir"] = vec_json(e.torso_dir);
    }
    entries.push_back(std::move(entry));
  }
  write_json({{"version", 1}, {"entries", entries}}, dir / "bank.json");
}

CalibrationBank load_bank(const std::filesystem::path& dir) {
  const json index = read_json(dir / "bank.json");
  if (!index.contains("entries") || !index["entries"].is_array()) {
    throw JsonFormatError((dir / "bank.json").string() + ": missing entries array");
  }
  std::vector<CalibrationEntry> entries;
  for (const json& e : index["entries"]) {
    if (!e.contains("frame") || !e.contains("keypoints")) throw JsonFormatError("bank entry: missing frame or keypoints");
    auto frame = std::make_shared<const Frame>(load_frame(dir / e["frame"].get<std::string>()));
    KeypointSet kp = keypoints_from_json(e["keypoints"], frame->camera.intrinsics);
    entries.push_back(CalibrationEntry::make(frame, std::move(kp), e.value("source_index", 0)));
  }
  return CalibrationBank(std::move(entries));
}

}  // namespace volcap
