#include "pdgstudio/scene.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pdgstudio/error.hpp"
#include "pdgstudio/image_io.hpp"

namespace pdg {

using nlohmann::json;
namespace fs = std::filesystem;

void CameraModel::check() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw SceneError(SceneErrorKind::Malformed, "camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw SceneError(SceneErrorKind::Malformed, "camera size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
    throw SceneError(SceneErrorKind::Malformed, "principal point lies outside the image");
  if (!extrinsic.is_rigid(1e-9)) throw SceneError(SceneErrorKind::Malformed, "camera extrinsic is not a rigid motion");
}

PointCloud unproject(const DepthMap& depth, const Image& image, const CameraModel& camera, const Mask& mask) {
  if (depth.rows() != mask.rows() || depth.cols() != mask.cols() || image.rows() != mask.rows() || image.cols() != mask.cols())
    throw SceneError(SceneErrorKind::DimensionMismatch, "unproject: depth, image and mask sizes differ");
  const RigidTransform to_world = camera.extrinsic.inverse();
  PointCloud cloud;
  std::vector<Pixel> bad;
  for (int r = 0; r < mask.rows(); ++r)
    for (int c = 0; c < mask.cols(); ++c) {
      if (!mask.at(r, c)) continue;
      const float d = depth.at(r, c);
      if (!valid_depth(d)) {
        bad.push_back({r, c});
        continue;
      }
      const Vec3 in_camera(d * (c - camera.cx) / camera.fx, d * (r - camera.cy) / camera.fy, d);
      cloud.points.push_back(to_world.apply(in_camera));
      cloud.pixel_origin.push_back({r, c});
      cloud.colors.push_back(pixel_rgb(image, r, c));
    }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << bad.size() << " masked pixel(s) without valid depth:";
    for (std::size_t i = 0; i < bad.size() && i < 16; ++i) msg << " (" << bad[i].row << ", " << bad[i].col << ")";
    if (bad.size() > 16) msg << " ...";
    throw SceneError(SceneErrorKind::InvalidDepth, msg.str());
  }
  return cloud;
}

Projection project_point(const Vec3& point, const CameraModel& camera) {
  const Vec3 p = camera.extrinsic.apply(point);
  if (!p.allFinite() || !(p.z() > 0.0)) return {};
  return {camera.fy * p.y() / p.z() + camera.cy, camera.fx * p.x() / p.z() + camera.cx, p.z(), true};
}

std::vector<Projection> project(std::span<const Vec3> points, const CameraModel& camera) {
  std::vector<Projection> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(project_point(p, camera));
  return out;
}

void validate_scene(const Scene& scene) {
  scene.camera.check();
  const int rows = scene.camera.height, cols = scene.camera.width;
  auto dims = [](int r, int c) { return std::to_string(c) + "x" + std::to_string(r); };
  if (scene.image.rows() != rows || scene.image.cols() != cols || scene.image.channels() != 3)
    throw SceneError(SceneErrorKind::DimensionMismatch,
                     "image is " + dims(scene.image.rows(), scene.image.cols()) + ", camera expects " + dims(rows, cols));
  if (scene.depth.rows() != rows || scene.depth.cols() != cols)
    throw SceneError(SceneErrorKind::DimensionMismatch,
                     "depth is " + dims(scene.depth.rows(), scene.depth.cols()) + ", image is " + dims(rows, cols));
  std::vector<const std::string*> owner(static_cast<std::size_t>(rows) * cols, nullptr);
  for (const auto& [id, mask] : scene.part_masks) {
    if (mask.rows() != rows || mask.cols() != cols)
      throw SceneError(SceneErrorKind::DimensionMismatch,
                       "mask '" + id + "' is " + dims(mask.rows(), mask.cols()) + ", image is " + dims(rows, cols));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        if (!mask.at(r, c)) continue;
        auto& o = owner[static_cast<std::size_t>(r) * cols + c];
        if (o) {
          std::ostringstream msg;
          msg << "masks '" << *o << "' and '" << id << "' overlap at pixel (" << r << ", " << c << ")";
          throw SceneError(SceneErrorKind::MaskOverlap, msg.str());
        }
        o = &id;
      }
  }
  for (const auto& [id, mask] : scene.part_masks) {
    try {
      unproject(scene.depth, scene.image, scene.camera, mask);
    } catch (const SceneError& e) {
      throw SceneError(e.kind(), "mask '" + id + "': " + e.what());
    }
  }
}

CameraModel camera_from_json(const json& j) {
  static const std::set<std::string> allowed{"fx", "fy", "cx", "cy", "width", "height", "extrinsic"};
  try {
    for (const auto& [key, value] : j.items())
      if (!allowed.count(key)) throw SceneError(SceneErrorKind::Malformed, "camera: unknown field '" + key + "'");
    CameraModel cam;
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    if (j.contains("extrinsic")) {
      const auto& e = j.at("extrinsic");
      for (const auto& [key, value] : e.items())
        if (key != "rotation" && key != "translation")
          throw SceneError(SceneErrorKind::Malformed, "camera.extrinsic: unknown field '" + key + "'");
      const auto& rot = e.at("rotation");
      const auto& tr = e.at("translation");
      if (rot.size() != 3 || tr.size() != 3)
        throw SceneError(SceneErrorKind::Malformed, "camera.extrinsic needs a 3x3 rotation and a 3-vector");
      for (int r = 0; r < 3; ++r) {
        if (rot[r].size() != 3) throw SceneError(SceneErrorKind::Malformed, "camera.extrinsic rotation must be 3x3");
        for (int c = 0; c < 3; ++c) cam.extrinsic.rotation(r, c) = rot[r][c].get<double>();
        cam.extrinsic.translation(r) = tr[r].get<double>();
      }
    }
    return cam;
  } catch (const json::exception& e) {
    throw SceneError(SceneErrorKind::Malformed, std::string("camera: ") + e.what());
  }
}

json camera_to_json(const CameraModel& camera) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    rot.push_back({camera.extrinsic.rotation(r, 0), camera.extrinsic.rotation(r, 1), camera.extrinsic.rotation(r, 2)});
  const auto& t = camera.extrinsic.translation;
  return {{"fx", camera.fx},
          {"fy", camera.fy},
          {"cx", camera.cx},
          {"cy", camera.cy},
          {"width", camera.width},
          {"height", camera.height},
          {"extrinsic", {{"rotation", rot}, {"translation", {t.x(), t.y(), t.z()}}}}};
}

namespace {

fs::path resolve(const fs::path& base, const std::string& rel) {
  fs::path p(rel);
  return p.is_absolute() ? p : base / p;
}

void require_file(const fs::path& path, const std::string& role) {
  if (!fs::is_regular_file(path))
    throw SceneError(SceneErrorKind::MissingFile, role + " file '" + path.string() + "' does not exist");
}

template <typename F>
auto load_or_malformed(const fs::path& path, F&& load) {
  try {
    return load(path);
  } catch (const IoError& e) {
    throw SceneError(SceneErrorKind::Malformed, e.what());
  }
}

DepthMap load_depth(const fs::path& path, std::optional<double> scale) {
  const auto ext = path.extension().string();
  if (ext == ".pfm") return load_or_malformed(path, read_pfm);
  if (ext != ".png") throw SceneError(SceneErrorKind::Malformed, "depth must be .pfm or 16-bit .png");
  if (!scale) throw SceneError(SceneErrorKind::Malformed, "16-bit PNG depth requires 'depth_scale'");
  PngRaster png = load_or_malformed(path, [](const fs::path& p) { return read_png(p); });
  if (png.bit_depth != 16 || png.channels != 1)
    throw SceneError(SceneErrorKind::Malformed, "PNG depth must be 16-bit single channel");
  DepthMap depth(png.rows, png.cols, 1);
  for (std::size_t i = 0; i < png.samples.size(); ++i)
    depth.data()[i] = static_cast<float>(png.samples[i] * *scale);
  return depth;
}

}  // namespace

Scene load_scene(const fs::path& manifest) {
  require_file(manifest, "scene manifest");
  json doc;
  try {
    doc = json::parse(read_text_file(manifest));
  } catch (const json::exception& e) {
    throw SceneError(SceneErrorKind::Malformed, "scene manifest: " + std::string(e.what()));
  }
  static const std::set<std::string> allowed{"image", "depth", "depth_scale", "camera", "masks", "external_tool"};
  for (const auto& [key, value] : doc.items())
    if (!allowed.count(key)) throw SceneError(SceneErrorKind::Malformed, "scene manifest: unknown field '" + key + "'");

  const fs::path base = manifest.parent_path();
  Scene scene;
  try {
    const fs::path image_path = resolve(base, doc.at("image").get<std::string>());
    const fs::path depth_path = resolve(base, doc.at("depth").get<std::string>());
    require_file(image_path, "image");
    require_file(depth_path, "depth");
    std::optional<double> scale;
    if (doc.contains("depth_scale")) scale = doc.at("depth_scale").get<double>();
    scene.image = load_or_malformed(image_path, read_rgb_png);
    scene.depth = load_depth(depth_path, scale);

    const auto& cam = doc.at("camera");
    if (cam.is_string()) {
      const fs::path cam_path = resolve(base, cam.get<std::string>());
      require_file(cam_path, "camera");
      json cj;
      try {
        cj = json::parse(read_text_file(cam_path));
      } catch (const json::exception& e) {
        throw SceneError(SceneErrorKind::Malformed, "camera: " + std::string(e.what()));
      }
      scene.camera = camera_from_json(cj);
    } else {
      scene.camera = camera_from_json(cam);
    }

    if (doc.contains("masks")) {
      for (const auto& [id, rel] : doc.at("masks").items()) {
        const fs::path mask_path = resolve(base, rel.get<std::string>());
        require_file(mask_path, "mask '" + id + "'");
        scene.part_masks.emplace(id, load_or_malformed(mask_path, read_mask_png));
      }
    }
    if (doc.contains("external_tool")) scene.external_tool = doc.at("external_tool").get<std::string>();
  } catch (const json::exception& e) {
    throw SceneError(SceneErrorKind::Malformed, "scene manifest: " + std::string(e.what()));
  }
  validate_scene(scene);
  return scene;
}

std::string mask_file_name(int index, const std::string& id) {
  std::string safe;
  for (char ch : id) safe.push_back(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ? ch : '_');
  return "mask_" + std::to_string(index) + "_" + safe + ".png";
}

fs::path save_scene(const Scene& scene, const fs::path& dir) {
  fs::create_directories(dir);
  write_png(dir / "image.png", scene.image);
  write_pfm(dir / "depth.pfm", scene.depth);
  write_text_file(dir / "camera.json", camera_to_json(scene.camera).dump(2) + "\n");
  json masks = json::object();
  int index = 0;
  for (const auto& [id, mask] : scene.part_masks) {
    const std::string name = mask_file_name(index++, id);
    write_mask_png(dir / name, mask);
    masks[id] = name;
  }
  json doc = {{"image", "image.png"}, {"depth", "depth.pfm"}, {"camera", "camera.json"}, {"masks", masks}};
  if (scene.external_tool) doc["external_tool"] = *scene.external_tool;
  const fs::path manifest = dir / "scene.json";
  write_text_file(manifest, doc.dump(2) + "\n");
  return manifest;
}

PointCloud lift_unoccupied(const Scene& scene, const Mask& occupied) {
  Mask free = make_mask(scene.depth.rows(), scene.depth.cols());
  for (int r = 0; r < free.rows(); ++r)
    for (int c = 0; c < free.cols(); ++c)
      free.at(r, c) = !occupied.at(r, c) && valid_depth(scene.depth.at(r, c));
  return unproject(scene.depth, scene.image, scene.camera, free);
}

}  // namespace pdg
