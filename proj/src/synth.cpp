#include "pdgstudio/synth.hpp"

#include <set>
#include <sstream>

#include "pdgstudio/image_io.hpp"

namespace pdg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw SceneError(SceneErrorKind::Malformed, where + ": unknown field '" + key + "'");
}

Vec3 vec3(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

}  // namespace

Rgb texture_color(std::uint64_t seed, int row, int col) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(row)) << 32 |
                                                         static_cast<std::uint32_t>(col)));
  return {static_cast<std::uint8_t>(h), static_cast<std::uint8_t>(h >> 8), static_cast<std::uint8_t>(h >> 16)};
}

SynthSpec parse_synth_spec(const json& j) {
  reject_unknown(j, {"width", "height", "camera", "background", "primitives"}, "synthetic spec");
  SynthSpec spec;
  try {
    spec.width = j.at("width").get<int>();
    spec.height = j.at("height").get<int>();
    if (j.contains("camera")) {
      const auto& c = j.at("camera");
      reject_unknown(c, {"fx", "fy", "cx", "cy"}, "synthetic camera");
      if (c.contains("fx")) spec.fx = c.at("fx").get<double>();
      if (c.contains("fy")) spec.fy = c.at("fy").get<double>();
      if (c.contains("cx")) spec.cx = c.at("cx").get<double>();
      if (c.contains("cy")) spec.cy = c.at("cy").get<double>();
    }
    if (j.contains("background")) {
      const auto& b = j.at("background");
      reject_unknown(b, {"depth", "seed"}, "synthetic background");
      spec.background_depth = b.at("depth").get<double>();
      spec.background_seed = b.value("seed", std::uint64_t{0});
    }
    for (const auto& p : j.at("primitives")) {
      reject_unknown(p, {"id", "rect", "depth", "seed", "motion"}, "synthetic primitive");
      SynthRect rect;
      rect.id = p.at("id").get<std::string>();
      const auto& box = p.at("rect");
      reject_unknown(box, {"row", "col", "rows", "cols"}, "synthetic rect");
      rect.row = box.at("row").get<int>();
      rect.col = box.at("col").get<int>();
      rect.rows = box.at("rows").get<int>();
      rect.cols = box.at("cols").get<int>();
      rect.depth = p.at("depth").get<double>();
      rect.seed = p.value("seed", std::uint64_t{0});
      if (p.contains("motion")) {
        const auto& m = p.at("motion");
        reject_unknown(m, {"parent", "kind", "axis", "center", "range", "target"}, "synthetic motion");
        SynthMotion motion;
        motion.parent = m.value("parent", std::string(kStaticRoot));
        motion.kind = motion_kind_from_string(m.at("kind").get<std::string>());
        motion.axis = vec3(m.at("axis"));
        if (m.contains("center")) motion.center = vec3(m.at("center"));
        motion.range = {m.at("range").at(0).get<double>(), m.at("range").at(1).get<double>()};
        if (m.contains("target")) motion.target = m.at("target").get<double>();
        rect.motion = motion;
      }
      spec.primitives.push_back(std::move(rect));
    }
  } catch (const json::exception& e) {
    throw SceneError(SceneErrorKind::Malformed, std::string("synthetic spec: ") + e.what());
  } catch (const DocumentError& e) {
    throw SceneError(SceneErrorKind::Malformed, std::string("synthetic spec: ") + e.what());
  }
  return spec;
}

SynthResult synth_scene(const SynthSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw SceneError(SceneErrorKind::Malformed, "synthetic scene size must be positive");
  const int rows = spec.height, cols = spec.width;

  SynthResult out;
  Scene& scene = out.scene;
  scene.camera.width = cols;
  scene.camera.height = rows;
  scene.camera.fx = spec.fx.value_or(cols);
  scene.camera.fy = spec.fy.value_or(spec.fx.value_or(cols));
  scene.camera.cx = spec.cx.value_or(cols / 2);
  scene.camera.cy = spec.cy.value_or(rows / 2);
  scene.camera.check();

  scene.image = make_image(rows, cols);
  scene.depth = DepthMap(rows, cols, 1, 0.0f);
  std::vector<int> owner(static_cast<std::size_t>(rows) * cols, -1);
  if (spec.background_depth) {
    if (!(*spec.background_depth > 0.0)) throw SceneError(SceneErrorKind::Malformed, "background depth must be positive");
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        scene.depth.at(r, c) = static_cast<float>(*spec.background_depth);
        const Rgb rgb = texture_color(spec.background_seed, r, c);
        for (int ch = 0; ch < 3; ++ch) scene.image.at(r, c, ch) = rgb[ch];
      }
  }

  std::set<std::string> ids;
  for (int i = 0; i < static_cast<int>(spec.primitives.size()); ++i) {
    const SynthRect& p = spec.primitives[i];
    if (!ids.insert(p.id).second) throw SceneError(SceneErrorKind::Malformed, "duplicate primitive id '" + p.id + "'");
    if (p.rows <= 0 || p.cols <= 0 || p.row < 0 || p.col < 0 || p.row + p.rows > rows || p.col + p.cols > cols)
      throw SceneError(SceneErrorKind::Malformed, "primitive '" + p.id + "' does not fit inside the image");
    if (!(p.depth > 0.0)) throw SceneError(SceneErrorKind::Malformed, "primitive '" + p.id + "' needs positive depth");
    const float depth = static_cast<float>(p.depth);
    for (int r = p.row; r < p.row + p.rows; ++r)
      for (int c = p.col; c < p.col + p.cols; ++c) {
        int& o = owner[static_cast<std::size_t>(r) * cols + c];
        if (o >= 0) {
          const float other = scene.depth.at(r, c);
          if (other == depth) {
            std::ostringstream msg;
            msg << "primitives '" << spec.primitives[o].id << "' and '" << p.id << "' overlap at equal depth at pixel ("
                << r << ", " << c << ")";
            throw SceneError(SceneErrorKind::OverlappingPrimitives, msg.str());
          }
          if (other < depth) continue;
        }
        o = i;
        scene.depth.at(r, c) = depth;
        const Rgb rgb = texture_color(p.seed, r, c);
        for (int ch = 0; ch < 3; ++ch) scene.image.at(r, c, ch) = rgb[ch];
      }
  }

  for (int i = 0; i < static_cast<int>(spec.primitives.size()); ++i) {
    const SynthRect& p = spec.primitives[i];
    Mask mask = make_mask(rows, cols);
    for (std::size_t k = 0; k < owner.size(); ++k) mask.data()[k] = owner[k] == i;
    if (count_set(mask) == 0) throw SceneError(SceneErrorKind::Malformed, "primitive '" + p.id + "' is fully occluded");
    scene.part_masks.emplace(p.id, mask);
  }
  validate_scene(scene);

  std::map<std::string, std::string> mask_files;
  int index = 0;
  for (const auto& [id, mask] : scene.part_masks) mask_files[id] = mask_file_name(index++, id);

  for (const SynthRect& p : spec.primitives) {
    const Mask& mask = scene.part_masks.at(p.id);
    PointCloud cloud = unproject(scene.depth, scene.image, scene.camera, mask);
    PartNode node{p.id, std::move(cloud.points), std::move(cloud.pixel_origin), std::move(cloud.colors), mask,
                  p.motion.has_value()};
    out.pdg.nodes.push_back(std::move(node));
    out.document.nodes.push_back({p.id, p.motion.has_value(), mask_files.at(p.id), std::nullopt});
    if (p.motion) {
      const SynthMotion& m = *p.motion;
      out.pdg.edges.push_back({m.parent, p.id, m.kind, m.axis, m.center, m.range});
      if (m.target) out.target.params[p.id] = *m.target;
    }
  }
  out.document.edges = out.pdg.edges;
  return out;
}

fs::path write_synth(const SynthResult& result, const fs::path& dir) {
  const fs::path manifest = save_scene(result.scene, dir);
  save_pdg_document(dir / "pdg.json", result.document);
  save_pose(dir / "pose.json", result.target);
  return manifest;
}

}  // namespace pdg
