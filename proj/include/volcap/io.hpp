#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>

#include "volcap/frame.hpp"
#include "volcap/selector.hpp"

namespace volcap {

namespace fs = std::filesystem;

// PNG codecs. 8-bit color maps [0, 1] to round(v * 255); reads return k / 255.
void write_png_rgb8(const fs::path& path, const RgbImage& img);
RgbImage read_png_rgb8(const fs::path& path);
void write_png_gray8(const fs::path& path, const ScalarImage& img);  // [0, 1] -> 0..255
ScalarImage read_png_gray8(const fs::path& path);                    // 0..255 -> [0, 1]
void write_png_gray16(const fs::path& path, const Image<std::uint16_t>& img);
Image<std::uint16_t> read_png_gray16(const fs::path& path);

// Depth on disk: integer millimeters, 0 = invalid.
Image<std::uint16_t> depth_to_millimeters(const DepthMap& depth);
DepthMap depth_from_millimeters(const Image<std::uint16_t>& mm);

nlohmann::json camera_to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j);
Camera load_camera(const fs::path& path);
void save_camera(const Camera& camera, const fs::path& path);

// Array of 17 {name, x, y, z?, valid}; z is the camera depth in meters and
// the 3D position is rebuilt from (x, y, z) with the intrinsics.
nlohmann::json keypoints_to_json(const KeypointSet& kp);
KeypointSet keypoints_from_json(const nlohmann::json& j, const Intrinsics& k);

// Frame directory: color.png, depth.png (uint16 mm), mask.png (>= 128
// foreground), camera.json, keypoints.json.
void save_frame(const Frame& frame, const fs::path& dir);
Frame load_frame(const fs::path& dir);

// Sorted subdirectories of `dir` that contain a color.png.
std::vector<fs::path> list_frame_dirs(const fs::path& dir);

nlohmann::json read_json(const fs::path& path);
void write_json(const nlohmann::json& j, const fs::path& path);

}  // namespace volcap
