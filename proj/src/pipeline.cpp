#include "volcap/pipeline.hpp"

#include "volcap/bank.hpp"
#include "volcap/io.hpp"

namespace volcap {

using nlohmann::json;

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw JsonFormatError(std::string("config field '") + key + "': " + e.what());
  }
}

template <typename F>
auto run_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

SelectorWeights selector_weights_from_json(const json& j) {
  SelectorWeights w;
  read_opt(j, "w_head", w.w_head);
  read_opt(j, "w_torso", w.w_torso);
  read_opt(j, "w_sim", w.w_sim);
  if (j.contains("sigma_s") && !j["sigma_s"].is_null()) {
    double s = 0.0;
    read_opt(j, "sigma_s", s);
    w.sigma_s = s;
  }
  try {
    w.validate();
  } catch (const ContractError& e) {
    throw JsonFormatError(e.what());
  }
  return w;
}

BlendConfig blend_config_from_json(const json& j) {
  BlendConfig b;
  read_opt(j, "gamma_g", b.gamma_g);
  read_opt(j, "tau", b.tau);
  if (!(b.gamma_g >= 0.0) || !(b.tau >= 0.0 && b.tau <= 1.0)) throw JsonFormatError("blend config out of range");
  return b;
}

PartGeometry part_geometry_from_json(const json& j) {
  PartGeometry g;
  read_opt(j, "limb_radius_factor", g.limb_radius_factor);
  read_opt(j, "head_radius_factor", g.head_radius_factor);
  read_opt(j, "body_margin_factor", g.body_margin_factor);
  read_opt(j, "edge_px", g.edge_px);
  return g;
}

json config_to_json(const PipelineConfig& cfg) {
  json sel = {{"w_head", cfg.selector.w_head}, {"w_torso", cfg.selector.w_torso}, {"w_sim", cfg.selector.w_sim}};
  sel["sigma_s"] = cfg.selector.sigma_s ? json(*cfg.selector.sigma_s) : json(nullptr);
  return {{"version", kConfigVersion},
          {"splat", {{"kernel_radius", cfg.splat.kernel_radius}, {"depth_falloff", cfg.splat.depth_falloff}}},
          {"selector", sel},
          {"parts",
           {{"limb_radius_factor", cfg.parts.limb_radius_factor},
            {"head_radius_factor", cfg.parts.head_radius_factor},
            {"body_margin_factor", cfg.parts.body_margin_factor},
            {"edge_px", cfg.parts.edge_px}}},
          {"blend", {{"gamma_g", cfg.blend.gamma_g}, {"tau", cfg.blend.tau}}},
          {"losses",
           {{"w_bg", cfg.losses.w_bg},
            {"w_fg", cfg.losses.w_fg},
            {"w_fgref", cfg.losses.w_fgref},
            {"w_rec", cfg.losses.w_rec},
            {"w_l1", cfg.losses.w_l1}}}};
}

PipelineConfig config_from_json(const json& j) {
  if (!j.is_object()) throw JsonFormatError("config: expected an object");
  if (j.contains("version") && j["version"] != kConfigVersion) {
    throw JsonFormatError("config: unsupported version " + j["version"].dump());
  }
  PipelineConfig cfg;
  if (j.contains("splat")) {
    read_opt(j["splat"], "kernel_radius", cfg.splat.kernel_radius);
    read_opt(j["splat"], "depth_falloff", cfg.splat.depth_falloff);
  }
  if (j.contains("selector")) cfg.selector = selector_weights_from_json(j["selector"]);
  if (j.contains("parts")) cfg.parts = part_geometry_from_json(j["parts"]);
  if (j.contains("blend")) cfg.blend = blend_config_from_json(j["blend"]);
  if (j.contains("losses")) {
    const json& l = j["losses"];
    read_opt(l, "w_bg", cfg.losses.w_bg);
    read_opt(l, "w_fg", cfg.losses.w_fg);
    read_opt(l, "w_fgref", cfg.losses.w_fgref);
    read_opt(l, "w_rec", cfg.losses.w_rec);
    read_opt(l, "w_l1", cfg.losses.w_l1);
  }
  return cfg;
}

Rerender rerender(const Frame& input, const KeypointSet& input_kp, const Camera& target, const SplatOptions& opts) {
  input.validate();
  target.intrinsics.validate();
  Rerender r;
  r.relative = relative_transform(input.camera, target);

  std::vector<Eigen::Vector2i> pixels;
  const PointCloud cloud = depth_to_cloud(input.depth, input.color, input.mask, input.camera.intrinsics, &pixels);
  const NormalMap source_normals = normals_from_depth(input.depth, input.camera.intrinsics);
  std::vector<Vec3> point_normals;
  point_normals.reserve(pixels.size());
  for (const auto& px : pixels) point_normals.push_back(r.relative.rotate(source_normals(px.x(), px.y())));

  r.cloud = splat_render(transform_cloud(cloud, r.relative), target.intrinsics, opts);
  r.normals = gather(r.cloud, point_normals, Vec3(Vec3::Zero()));
  r.confidence = view_confidence(r.relative);
  r.keypoints = transform_keypoints(input_kp, r.relative, target.intrinsics);
  return r;
}

RenderResult render_novel(const Frame& input, const CalibrationBank& bank, const Camera& target,
                          const PipelineConfig& cfg, const Compositor& compositor, const Blender* blender) {
  const KeypointSet input_kp = run_stage("pose", [&] {
    auto kp = prepare_keypoints(input);
    if (!kp) throw DegenerateError("input frame rejected: nose, shoulders or hips missing");
    return *kp;
  });

  RenderResult out;
  out.rerender = run_stage("rerender", [&] { return rerender(input, input_kp, target, cfg.splat); });
  out.selection = run_stage("select", [&] {
    return select(bank, out.rerender.keypoints, cfg.selector, target.intrinsics.width);
  });

  const CalibrationEntry& entry = bank[out.selection.index];
  out.warp = run_stage("warp", [&] {
    const Frame& calib = *entry.frame;
    if (calib.width() != target.intrinsics.width || calib.height() != target.intrinsics.height) {
      throw ShapeError("calibration frame size differs from the target camera");
    }
    out.calib_masks = part_masks_geometric(entry.keypoints, calib.width(), calib.height(), cfg.parts);
    return compositor.composite(warp_parts(calib, entry.keypoints, out.rerender.keypoints, out.calib_masks));
  });

  run_stage("blend", [&] {
    BlendInput in{out.rerender.cloud, out.warp, out.rerender.normals, out.rerender.confidence};
    out.support = blend_support(in, cfg.blend);
    out.output = blender ? blender->run(in) : Blender(cfg.blend).run(in);
    return 0;
  });
  return out;
}

void dump_stages(const RenderResult& r, const CalibrationBank& bank, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_png_rgb8(dir / "cloud_color.png", r.rerender.cloud.color);
  write_png_gray16(dir / "cloud_depth.png", depth_to_millimeters(r.rerender.cloud.depth));
  write_png_gray8(dir / "cloud_coverage.png", r.rerender.cloud.coverage);
  RgbImage normals(r.rerender.normals.width(), r.rerender.normals.height(), Rgb::Zero());
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!r.rerender.normals[i].isZero()) normals[i] = 0.5 * (r.rerender.normals[i] + Vec3::Ones());
  }
  write_png_rgb8(dir / "normals.png", normals);
  write_png_rgb8(dir / "calib_color.png", bank[r.selection.index].frame->color);
  write_png_gray8(dir / "calib_background.png", r.calib_masks.background);
  for (PartGroup p : kAllParts) {
    const auto i = static_cast<std::size_t>(p);
    const std::string name(part_name(p));
    write_png_gray8(dir / ("calib_mask_" + name + ".png"), r.calib_masks.parts[i]);
    write_png_rgb8(dir / ("warp_texture_" + name + ".png"), r.warp.textures[i]);
    write_png_gray8(dir / ("warp_mask_" + name + ".png"), r.warp.masks[i]);
  }
  write_png_rgb8(dir / "warp_color.png", r.warp.color);
  write_png_gray8(dir / "warp_part_silhouette.png", r.warp.part_silhouette);
  write_png_gray8(dir / "warp_silhouette.png", r.warp.silhouette);
  write_png_rgb8(dir / "output.png", r.output);
  write_png_gray8(dir / "output_mask.png", r.support);
  write_json({{"confidence", r.rerender.confidence},
              {"selected_index", r.selection.index},
              {"selected_source_index", bank[r.selection.index].source_index},
              {"s_head", r.selection.breakdown.s_head},
              {"s_torso", r.selection.breakdown.s_torso},
              {"s_sim", r.selection.breakdown.s_sim},
              {"total", r.selection.breakdown.total}},
             dir / "stages.json");
}

void save_render(const RenderResult& r, const Camera& target, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_png_rgb8(dir / "color.png", r.output);
  write_png_gray8(dir / "mask.png", r.support);
  save_camera(target, dir / "camera.json");
}

}  // namespace volcap
