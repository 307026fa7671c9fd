#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <string>

#include "volcap/bank.hpp"
#include "volcap/io.hpp"
#include "volcap/metrics.hpp"
#include "volcap/parallel.hpp"
#include "volcap/pipeline.hpp"
#include "volcap/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace volcap;

namespace {

std::string frame_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", i);
  return buf;
}

// JSON has no infinity; identical images report psnr as the string "inf".
json number_or_inf(double v) { return std::isinf(v) ? json("inf") : json(v); }

struct SynthArgs {
  fs::path out;
  int frames = 36;
  std::uint64_t seed = 0;
  double orbit_step = 10.0;
  double start = 0.0;
  double jitter = 0.0;
  int width = 320;
  int height = 256;
  double focal = 300.0;
  double distance = 3.0;
};

int run_synth(const SynthArgs& a) {
  fs::create_directories(a.out);
  for (int i = 0; i < a.frames; ++i) {
    const PoseParams pose = jitter_pose(PoseParams::standing(), a.jitter, a.seed + 1 + static_cast<std::uint64_t>(i));
    const Humanoid h = make_humanoid(pose, a.seed);
    const Camera cam = orbit_camera(a.start + a.orbit_step * i, a.distance, a.width, a.height, a.focal);
    save_frame(render_synthetic(h, cam), a.out / frame_name(i));
  }
  std::cout << "wrote " << a.frames << " frames to " << a.out.string() << "\n";
  return 0;
}

int run_calibrate(const fs::path& seq, const fs::path& out, std::size_t max_frames) {
  const CalibrationBank bank = build_bank(seq, max_frames);
  save_bank(bank, out);
  std::cout << "bank with " << bank.size() << " entries written to " << out.string() << "\n";
  return 0;
}

SelectorWeights load_weights(const fs::path& path) {
  const json j = read_json(path);
  return selector_weights_from_json(j.contains("selector") ? j["selector"] : j);
}

int run_select(const fs::path& bank_dir, const fs::path& frame_dir, const fs::path& weights) {
  const CalibrationBank bank = load_bank(bank_dir);
  const Frame frame = load_frame(frame_dir);
  const auto kp = prepare_keypoints(frame);
  if (!kp) throw StageError("pose", "frame rejected: nose, shoulders or hips missing");
  const SelectorWeights w = weights.empty() ? SelectorWeights{} : load_weights(weights);
  const Selection s = select(bank, *kp, w, frame.width());
  json limbs = json::array();
  for (double v : s.breakdown.s_sim_per_limb) limbs.push_back(v);
  const json report = {{"index", s.index},
                       {"source_index", bank[s.index].source_index},
                       {"s_head", s.breakdown.s_head},
                       {"s_torso", s.breakdown.s_torso},
                       {"s_sim", s.breakdown.s_sim},
                       {"s_sim_per_limb", limbs},
                       {"total", s.breakdown.total}};
  std::cout << report.dump(2) << "\n";
  return 0;
}

int run_render(const fs::path& frame_dir, const fs::path& bank_dir, const fs::path& camera, const fs::path& out,
               const fs::path& dump, const fs::path& config) {
  const PipelineConfig cfg = config.empty() ? PipelineConfig{} : config_from_json(read_json(config));
  const Frame input = load_frame(frame_dir);
  const CalibrationBank bank = load_bank(bank_dir);
  const Camera target = load_camera(camera);
  const RenderResult r = render_novel(input, bank, target, cfg);
  save_render(r, target, out);
  if (!dump.empty()) dump_stages(r, bank, dump);
  std::cout << "rendered " << out.string() << " (confidence " << r.rerender.confidence << ", calibration entry "
            << r.selection.index << ")\n";
  return 0;
}

struct PairMetrics {
  double l1 = 0, psnr = 0, ms_ssim = 0;
  double l1_fg = 0, psnr_fg = 0, ms_ssim_fg = 0;
};

RgbImage masked(const RgbImage& img, const ScalarImage& mask) {
  RgbImage out = img;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i] <= 0.5) out[i].setZero();
  }
  return out;
}

PairMetrics evaluate_pair(const fs::path& pred_dir, const fs::path& gt_dir) {
  const RgbImage pred = read_png_rgb8(pred_dir / "color.png");
  const RgbImage gt = read_png_rgb8(gt_dir / "color.png");
  const ScalarImage mask = read_png_gray8(gt_dir / "mask.png");
  require_same_shape(pred, gt, "eval: prediction vs ground truth");
  require_same_shape(pred, mask, "eval: prediction vs ground-truth mask");
  PairMetrics m;
  m.l1 = l1_image(pred, gt);
  m.psnr = psnr(pred, gt);
  m.l1_fg = l1_image(pred, gt, &mask);
  m.psnr_fg = psnr(pred, gt, &mask);
  if (std::min(pred.width(), pred.height()) >= 161) {
    m.ms_ssim = ms_ssim(pred, gt);
    m.ms_ssim_fg = ms_ssim(masked(pred, mask), masked(gt, mask));
  } else {
    m.ms_ssim = m.ms_ssim_fg = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

json metrics_json(const PairMetrics& m) {
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : number_or_inf(v); };
  return {{"l1", num(m.l1)},
          {"psnr", num(m.psnr)},
          {"ms_ssim", num(m.ms_ssim)},
          {"foreground", {{"l1", num(m.l1_fg)}, {"psnr", num(m.psnr_fg)}, {"ms_ssim", num(m.ms_ssim_fg)}}}};
}

int run_eval(const fs::path& pred, const fs::path& gt, const fs::path& out) {
  std::vector<std::pair<std::string, PairMetrics>> rows;
  if (fs::exists(pred / "color.png")) {
    rows.emplace_back(pred.filename().string(), evaluate_pair(pred, gt));
  } else {
    for (const fs::path& dir : list_frame_dirs(pred)) {
      const fs::path gt_dir = gt / dir.filename();
      if (!fs::exists(gt_dir / "color.png")) throw MissingFileError("eval: no ground truth for " + dir.string());
      rows.emplace_back(dir.filename().string(), evaluate_pair(dir, gt_dir));
    }
  }
  if (rows.empty()) throw MissingFileError("eval: no predicted frames in " + pred.string());

  // Aggregates average l1 and ms_ssim; psnr is computed from the mean MSE of the frames.
  PairMetrics mean;
  double mse = 0.0, mse_fg = 0.0;
  json frames = json::array();
  for (const auto& [name, m] : rows) {
    mean.l1 += m.l1 / rows.size();
    mean.l1_fg += m.l1_fg / rows.size();
    mean.ms_ssim += m.ms_ssim / rows.size();
    mean.ms_ssim_fg += m.ms_ssim_fg / rows.size();
    mse += 65025.0 * std::pow(10.0, -m.psnr / 10.0) / rows.size();
    mse_fg += 65025.0 * std::pow(10.0, -m.psnr_fg / 10.0) / rows.size();
    json row = metrics_json(m);
    row["frame"] = name;
    frames.push_back(row);
  }
  mean.psnr = mse > 0 ? 10.0 * std::log10(65025.0 / mse) : std::numeric_limits<double>::infinity();
  mean.psnr_fg = mse_fg > 0 ? 10.0 * std::log10(65025.0 / mse_fg) : std::numeric_limits<double>::infinity();
  json report = metrics_json(mean);
  report["version"] = 1;
  report["frames"] = frames;
  write_json(report, out);
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-viewpoint human rendering from one RGBD frame and a calibration bank"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Render a synthetic orbit sequence of one capsule humanoid");
  synth->add_option("--out", sa.out, "Output sequence directory")->required();
  synth->add_option("--frames", sa.frames, "Number of frames")->check(CLI::PositiveNumber);
  synth->add_option("--seed", sa.seed, "Subject and pose seed");
  synth->add_option("--orbit-degrees", sa.orbit_step, "Camera yaw step between frames");
  synth->add_option("--start-degrees", sa.start, "Camera yaw of the first frame");
  synth->add_option("--pose-jitter", sa.jitter, "Per-frame random joint-angle offset amplitude (degrees)");
  synth->add_option("--width", sa.width)->check(CLI::PositiveNumber);
  synth->add_option("--height", sa.height)->check(CLI::PositiveNumber);
  synth->add_option("--focal", sa.focal)->check(CLI::PositiveNumber);
  synth->add_option("--distance", sa.distance)->check(CLI::PositiveNumber);

  fs::path seq, bank_out;
  std::size_t max_frames = 210;
  auto* calibrate = app.add_subcommand("calibrate", "Build a calibration bank from a frame sequence");
  calibrate->add_option("--seq", seq, "Sequence directory")->required();
  calibrate->add_option("--out", bank_out, "Bank directory")->required();
  calibrate->add_option("--max-frames", max_frames, "Uniformly subsample to at most this many")
      ->check(CLI::PositiveNumber);

  fs::path sel_bank, sel_frame, sel_weights;
  auto* selectc = app.add_subcommand("select", "Score a bank against a frame's pose");
  selectc->add_option("--bank", sel_bank)->required();
  selectc->add_option("--frame", sel_frame)->required();
  selectc->add_option("--weights", sel_weights, "Selector weights JSON");

  fs::path r_frame, r_bank, r_camera, r_out, r_dump, r_config;
  auto* render = app.add_subcommand("render", "Render the input frame from a novel camera");
  render->add_option("--frame", r_frame)->required();
  render->add_option("--bank", r_bank)->required();
  render->add_option("--camera", r_camera, "Target camera JSON")->required();
  render->add_option("--out", r_out)->required();
  render->add_option("--dump", r_dump, "Directory for intermediate stage images");
  render->add_option("--config", r_config, "Pipeline config JSON");

  fs::path e_pred, e_gt, e_out;
  auto* eval = app.add_subcommand("eval", "Compare predicted frames with ground truth");
  eval->add_option("--pred", e_pred)->required();
  eval->add_option("--gt", e_gt)->required();
  eval->add_option("--out", e_out, "Report JSON")->required();

  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);
  try {
    if (*synth) return run_synth(sa);
    if (*calibrate) return run_calibrate(seq, bank_out, max_frames);
    if (*selectc) return run_select(sel_bank, sel_frame, sel_weights);
    if (*render) return run_render(r_frame, r_bank, r_camera, r_out, r_dump, r_config);
    if (*eval) return run_eval(e_pred, e_gt, e_out);
  } catch (const StageError& e) {
    std::cerr << "error in stage " << e.stage() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
