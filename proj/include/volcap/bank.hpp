#pragma once

#include <filesystem>
#include <vector>

#include "volcap/selector.hpp"

namespace volcap {

// Gives every valid keypoint a 3D position (lifting from depth where the file
// had none), then applies the extrapolation/rejection rule.
std::optional<KeypointSet> prepare_keypoints(const Frame& frame);

// Indices floor(i * count / max_frames) for i < max_frames, or all indices
// when count <= max_frames.
std::vector<std::size_t> uniform_subsample(std::size_t count, std::size_t max_frames);

// Drops rejected frames, subsamples the rest uniformly, caches directions.
// Throws EmptyBankError when nothing is accepted.
CalibrationBank build_bank(const std::vector<Frame>& sequence, std::size_t max_frames);
CalibrationBank build_bank(const std::filesystem::path& sequence_dir, std::size_t max_frames);

// BANK/bank.json plus BANK/frames/NNNN frame directories.
void save_bank(const CalibrationBank& bank, const std::filesystem::path& dir);
CalibrationBank load_bank(const std::filesystem::path& dir);

}  // namespace volcap
