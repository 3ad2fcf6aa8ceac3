#include "pdgstudio/document.hpp"

#include <cmath>
#include <set>

#include "pdgstudio/image_io.hpp"
#include "pdgstudio/tensor.hpp"

namespace pdg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw DocumentError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw DocumentError(where + ": unknown field '" + key + "'");
}

Vec3 vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw DocumentError(where + ": expected 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json parse_file(const fs::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

PdgDocument parse_pdg_document(const json& j) {
  reject_unknown(j, {"version", "nodes", "edges"}, "graph document");
  PdgDocument doc;
  try {
    doc.version = j.at("version").get<int>();
    if (doc.version != kDocumentVersion)
      throw DocumentError("graph document: unsupported version " + std::to_string(doc.version));
    for (const auto& n : j.at("nodes")) {
      reject_unknown(n, {"id", "movable", "footprint_path", "points_path"}, "graph node");
      NodeDecl decl;
      decl.id = n.at("id").get<std::string>();
      decl.movable = n.at("movable").get<bool>();
      decl.footprint_path = n.at("footprint_path").get<std::string>();
      if (n.contains("points_path")) decl.points_path = n.at("points_path").get<std::string>();
      doc.nodes.push_back(std::move(decl));
    }
    for (const auto& e : j.at("edges")) {
      reject_unknown(e, {"parent", "child", "kind", "axis", "center", "range"}, "graph edge");
      MotionEdge edge;
      edge.parent = e.at("parent").get<std::string>();
      edge.child = e.at("child").get<std::string>();
      edge.kind = motion_kind_from_string(e.at("kind").get<std::string>());
      edge.axis = vec3(e.at("axis"), "edge axis");
      edge.center = vec3(e.at("center"), "edge center");
      const auto& range = e.at("range");
      if (!range.is_array() || range.size() != 2) throw DocumentError("edge range: expected [lo, hi]");
      edge.range = {range[0].get<double>(), range[1].get<double>()};
      doc.edges.push_back(std::move(edge));
    }
  } catch (const json::exception& e) {
    throw DocumentError(std::string("graph document: ") + e.what());
  }
  return doc;
}

json to_json(const PdgDocument& doc) {
  json nodes = json::array();
  for (const auto& n : doc.nodes) {
    json node = {{"id", n.id}, {"movable", n.movable}, {"footprint_path", n.footprint_path}};
    if (n.points_path) node["points_path"] = *n.points_path;
    nodes.push_back(std::move(node));
  }
  json edges = json::array();
  for (const auto& e : doc.edges)
    edges.push_back({{"parent", e.parent},
                     {"child", e.child},
                     {"kind", std::string(to_string(e.kind))},
                     {"axis", {e.axis.x(), e.axis.y(), e.axis.z()}},
                     {"center", {e.center.x(), e.center.y(), e.center.z()}},
                     {"range", {e.range.lo, e.range.hi}}});
  return {{"version", doc.version}, {"nodes", nodes}, {"edges", edges}};
}

PdgDocument load_pdg_document(const fs::path& path) { return parse_pdg_document(parse_file(path)); }

void save_pdg_document(const fs::path& path, const PdgDocument& doc) {
  write_text_file(path, to_json(doc).dump(2) + "\n");
}

void write_points_file(const fs::path& path, const PointCloud& cloud) {
  Tensor4f t(static_cast<std::uint32_t>(cloud.size()), 1, 1, 8);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const float row[8] = {static_cast<float>(cloud.points[i].x()), static_cast<float>(cloud.points[i].y()),
                          static_cast<float>(cloud.points[i].z()), static_cast<float>(cloud.pixel_origin[i].row),
                          static_cast<float>(cloud.pixel_origin[i].col), float(cloud.colors[i][0]),
                          float(cloud.colors[i][1]), float(cloud.colors[i][2])};
    for (int k = 0; k < 8; ++k) t.at(i, 0, 0, k) = row[k];
  }
  write_tensor(path, t);
}

PointCloud read_points_file(const fs::path& path) {
  Tensor4f t = read_tensor(path);
  if (t.rows() != 1 || t.cols() != 1 || t.channels() != 8)
    throw DocumentError(path.string() + ": points file must have shape (N, 1, 1, 8)");
  PointCloud cloud;
  for (std::size_t i = 0; i < t.frames(); ++i) {
    cloud.points.emplace_back(t.at(i, 0, 0, 0), t.at(i, 0, 0, 1), t.at(i, 0, 0, 2));
    cloud.pixel_origin.push_back({static_cast<int>(t.at(i, 0, 0, 3)), static_cast<int>(t.at(i, 0, 0, 4))});
    cloud.colors.push_back({static_cast<std::uint8_t>(t.at(i, 0, 0, 5)), static_cast<std::uint8_t>(t.at(i, 0, 0, 6)),
                            static_cast<std::uint8_t>(t.at(i, 0, 0, 7))});
  }
  return cloud;
}

Pdg assemble_pdg(const PdgDocument& doc, const fs::path& base_dir, const Scene* scene) {
  auto resolve = [&](const std::string& rel) {
    fs::path p(rel);
    return p.is_absolute() ? p : base_dir / p;
  };
  Pdg pdg;
  pdg.edges = doc.edges;
  for (const auto& decl : doc.nodes) {
    PartNode node;
    node.id = decl.id;
    node.movable = decl.movable;
    node.footprint = read_mask_png(resolve(decl.footprint_path));
    PointCloud cloud;
    if (decl.points_path) {
      cloud = read_points_file(resolve(*decl.points_path));
    } else if (scene) {
      if (node.footprint.rows() != scene->depth.rows() || node.footprint.cols() != scene->depth.cols())
        throw SceneError(SceneErrorKind::DimensionMismatch, "footprint of node '" + decl.id + "' does not match the scene size");
      try {
        cloud = unproject(scene->depth, scene->image, scene->camera, node.footprint);
      } catch (const SceneError& e) {
        throw SceneError(e.kind(), "node '" + decl.id + "': " + e.what());
      }
    } else {
      for (int r = 0; r < node.footprint.rows(); ++r)
        for (int c = 0; c < node.footprint.cols(); ++c)
          if (node.footprint.at(r, c)) {
            cloud.points.emplace_back(c, r, 1.0);
            cloud.pixel_origin.push_back({r, c});
            cloud.colors.push_back({0, 0, 0});
          }
    }
    node.points = std::move(cloud.points);
    node.pixel_origin = std::move(cloud.pixel_origin);
    node.colors = std::move(cloud.colors);
    pdg.nodes.push_back(std::move(node));
  }
  return pdg;
}

Pose parse_pose_document(const json& j) {
  reject_unknown(j, {"version", "params"}, "pose document");
  Pose pose;
  try {
    if (j.at("version").get<int>() != kDocumentVersion) throw DocumentError("pose document: unsupported version");
    for (const auto& [id, value] : j.at("params").items()) {
      const double v = value.get<double>();
      if (!std::isfinite(v)) throw DocumentError("pose document: parameter '" + id + "' is not finite");
      pose.params[id] = v;
    }
  } catch (const json::exception& e) {
    throw DocumentError(std::string("pose document: ") + e.what());
  }
  return pose;
}

json to_json(const Pose& pose) {
  json params = json::object();
  for (const auto& [id, v] : pose.params) params[id] = v;
  return {{"version", kDocumentVersion}, {"params", params}};
}

Pose load_pose(const fs::path& path) { return parse_pose_document(parse_file(path)); }

void save_pose(const fs::path& path, const Pose& pose) { write_text_file(path, to_json(pose).dump(2) + "\n"); }

json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics) {
  json out = json::array();
  for (const auto& d : diagnostics)
    out.push_back({{"violation", std::string(to_string(d.violation))}, {"subject", d.subject}, {"message", d.message}});
  return out;
}

}  // namespace pdg
