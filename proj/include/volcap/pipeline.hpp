#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>

#include "volcap/blender.hpp"
#include "volcap/metrics.hpp"
#include "volcap/selector.hpp"
#include "volcap/splat.hpp"
#include "volcap/warper.hpp"

namespace volcap {

inline constexpr int kConfigVersion = 1;

struct PipelineConfig {
  SplatOptions splat;
  SelectorWeights selector;
  PartGeometry parts;
  BlendConfig blend;
  LossConfig losses;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
// Missing sections keep their defaults. Throws JsonFormatError on a version
// mismatch or malformed values.
PipelineConfig config_from_json(const nlohmann::json& j);
SelectorWeights selector_weights_from_json(const nlohmann::json& j);
BlendConfig blend_config_from_json(const nlohmann::json& j);
PartGeometry part_geometry_from_json(const nlohmann::json& j);

// Geometric re-rendering of an RGBD frame into another camera.
struct Rerender {
  SplatOutput cloud;       // I_cloud
  NormalMap normals;       // novel-view normals per pixel
  double confidence = 0.0; // c
  KeypointSet keypoints;   // pose in the novel camera
  RigidTransform relative; // input camera -> novel camera
};

Rerender rerender(const Frame& input, const KeypointSet& input_kp, const Camera& target, const SplatOptions& opts);

struct RenderResult {
  Rerender rerender;
  Selection selection;
  PartMaskSet calib_masks;
  WarpResult warp;      // composited
  RgbImage output;      // I_out
  ScalarImage support;  // output silhouette
};

// Re-render, select, warp, blend. Stage failures surface as StageError.
RenderResult render_novel(const Frame& input, const CalibrationBank& bank, const Camera& target,
                          const PipelineConfig& cfg, const Compositor& compositor = {},
                          const Blender* blender = nullptr);

// Writes each intermediate image of a render as PNG into dir.
void dump_stages(const RenderResult& r, const CalibrationBank& bank, const std::filesystem::path& dir);

// Output frame directory: color.png, mask.png, camera.json.
void save_render(const RenderResult& r, const Camera& target, const std::filesystem::path& dir);

}  // namespace volcap
