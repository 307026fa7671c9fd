#include "volcap/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace volcap {

using nlohmann::json;

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) throw JsonFormatError(context + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw JsonFormatError(context + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw JsonFormatError(path.string() + ": " + e.what());
  }
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw MissingFileError("cannot create " + path.string());
  out << j.dump(2) << '\n';
}

Image<std::uint16_t> depth_to_millimeters(const DepthMap& depth) {
  Image<std::uint16_t> mm(depth.width(), depth.height(), 0);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    const double z = depth[i];
    if (!(z > 0.0)) continue;
    const long v = std::lround(z * 1000.0);
    if (v > 65535) throw ContractError("depth exceeds the 16-bit millimeter range");
    mm[i] = static_cast<std::uint16_t>(v);
  }
  return mm;
}

DepthMap depth_from_millimeters(const Image<std::uint16_t>& mm) {
  DepthMap depth(mm.width(), mm.height(), 0.0);
  for (std::size_t i = 0; i < mm.size(); ++i) depth[i] = mm[i] / 1000.0;
  return depth;
}

json camera_to_json(const Camera& camera) {
  const Intrinsics& k = camera.intrinsics;
  const Mat3& r = camera.extrinsic.rotation();
  const Vec3& t = camera.extrinsic.translation();
  json rot = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) rot.push_back(r(i, j));
  }
  return {{"fx", k.fx},         {"fy", k.fy},         {"ox", k.ox},
          {"oy", k.oy},         {"width", k.width},   {"height", k.height},
          {"rotation", rot},    {"translation", {t.x(), t.y(), t.z()}}};
}

Camera camera_from_json(const json& j) {
  const std::string ctx = "camera";
  Camera cam;
  cam.intrinsics = Intrinsics{field<double>(j, "fx", ctx),  field<double>(j, "fy", ctx),
                              field<double>(j, "ox", ctx),  field<double>(j, "oy", ctx),
                              field<int>(j, "width", ctx), field<int>(j, "height", ctx)};
  try {
    cam.intrinsics.validate();
  } catch (const ContractError& e) {
    throw JsonFormatError(std::string("camera: ") + e.what());
  }
  const auto rot = field<std::vector<double>>(j, "rotation", ctx);
  const auto trans = field<std::vector<double>>(j, "translation", ctx);
  if (rot.size() != 9 || trans.size() != 3) throw JsonFormatError("camera: rotation needs 9 and translation 3 numbers");
  Mat3 r;
  for (int i = 0; i < 9; ++i) r(i / 3, i % 3) = rot[static_cast<std::size_t>(i)];
  try {
    cam.extrinsic = RigidTransform(r, Vec3(trans[0], trans[1], trans[2]));
  } catch (const ContractError& e) {
    throw JsonFormatError(std::string("camera: ") + e.what());
  }
  return cam;
}

Camera load_camera(const fs::path& path) {
  try {
    return camera_from_json(read_json(path));
  } catch (const JsonFormatError& e) {
    throw JsonFormatError(path.string() + ": " + e.what());
  }
}

void save_camera(const Camera& camera, const fs::path& path) { write_json(camera_to_json(camera), path); }

json keypoints_to_json(const KeypointSet& kp) {
  json arr = json::array();
  for (int i = 0; i < kNumJoints; ++i) {
    const Keypoint& p = kp.at(i);
    json o = {{"name", std::string(joint_name(static_cast<Joint>(i)))},
              {"x", p.position2d.x()},
              {"y", p.position2d.y()},
              {"valid", p.valid}};
    if (p.position3d) o["z"] = p.position3d->z();
    arr.push_back(std::move(o));
  }
  return arr;
}

KeypointSet keypoints_from_json(const json& j, const Intrinsics& k) {
  if (!j.is_array() || j.size() != kNumJoints) throw JsonFormatError("keypoints: expected an array of 17 objects");
  KeypointSet kp;
  for (const json& o : j) {
    const std::string ctx = "keypoints";
    const auto name = field<std::string>(o, "name", ctx);
    const auto joint = joint_from_name(name);
    if (!joint) throw JsonFormatError("keypoints: unknown name '" + name + "'");
    Keypoint p;
    p.valid = field<bool>(o, "valid", ctx);
    p.position2d = Vec2(field<double>(o, "x", ctx), field<double>(o, "y", ctx));
    if (o.contains("z") && !o.at("z").is_null()) {
      const auto z = field<double>(o, "z", ctx);
      if (p.valid && z > 0.0) p.position3d = backproject(p.position2d, z, k);
    }
    kp[*joint] = p;
  }
  try {
    kp.validate();
  } catch (const ContractError& e) {
    throw JsonFormatError(e.what());
  }
  return kp;
}

void save_frame(const Frame& frame, const fs::path& dir) {
  frame.validate();
  fs::create_directories(dir);
  write_png_rgb8(dir / "color.png", frame.color);
  write_png_gray16(dir / "depth.png", depth_to_millimeters(frame.depth));
  ScalarImage binary(frame.mask.width(), frame.mask.height(), 0.0);
  for (std::size_t i = 0; i < binary.size(); ++i) binary[i] = frame.mask[i] >= 0.5 ? 1.0 : 0.0;
  write_png_gray8(dir / "mask.png", binary);
  save_camera(frame.camera, dir / "camera.json");
  write_json(keypoints_to_json(frame.keypoints), dir / "keypoints.json");
}

Frame load_frame(const fs::path& dir) {
  for (const char* name : {"color.png", "depth.png", "mask.png", "camera.json", "keypoints.json"}) {
    if (!fs::exists(dir / name)) throw MissingFileError("frame " + dir.string() + ": missing " + name);
  }
  Frame f;
  f.color = read_png_rgb8(dir / "color.png");
  f.depth = depth_from_millimeters(read_png_gray16(dir / "depth.png"));
  f.mask = read_png_gray8(dir / "mask.png");
  for (double& m : f.mask) m = m >= 128.0 / 255.0 ? 1.0 : 0.0;
  f.camera = load_camera(dir / "camera.json");
  try {
    f.keypoints = keypoints_from_json(read_json(dir / "keypoints.json"), f.camera.intrinsics);
  } catch (const JsonFormatError& e) {
    throw JsonFormatError((dir / "keypoints.json").string() + ": " + e.what());
  }
  f.validate();
  return f;
}

std::vector<fs::path> list_frame_dirs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw MissingFileError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "color.png")) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace volcap
