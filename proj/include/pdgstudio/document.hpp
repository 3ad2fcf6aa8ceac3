#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdgstudio/graph.hpp"
#include "pdgstudio/scene.hpp"

namespace pdg {

inline constexpr int kDocumentVersion = 1;

/// Node entry of a graph document; geometry lives in referenced files.
struct NodeDecl {
  std::string id;
  bool movable = false;
  std::string footprint_path;
  std::optional<std::string> points_path;
  bool operator==(const NodeDecl&) const = default;
};

/// On-disk form of a graph: node declarations plus motion edges.
struct PdgDocument {
  int version = kDocumentVersion;
  std::vector<NodeDecl> nodes;
  std::vector<MotionEdge> edges;
};

/// Strict parse: unknown or missing fields raise DocumentError.
PdgDocument parse_pdg_document(const nlohmann::json& j);
nlohmann::json to_json(const PdgDocument& doc);
/// Unreadable files or JSON syntax errors raise IoError.
PdgDocument load_pdg_document(const std::filesystem::path& path);
void save_pdg_document(const std::filesystem::path& path, const PdgDocument& doc);

/// Materializes a graph. Footprints resolve against `base_dir`. Node points come
/// from `points_path` when present, otherwise from lifting the footprint through
/// `scene`. Without a scene, footprint pixels are placed on the plane z = 1 with
/// x = col, y = row; that is enough for structural validation only.
Pdg assemble_pdg(const PdgDocument& doc, const std::filesystem::path& base_dir, const Scene* scene);

/// Points file: PDGT tensor of shape (N, 1, 1, 8) holding x, y, z, row, col, r, g, b.
void write_points_file(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_points_file(const std::filesystem::path& path);

Pose parse_pose_document(const nlohmann::json& j);
nlohmann::json to_json(const Pose& pose);
Pose load_pose(const std::filesystem::path& path);
void save_pose(const std::filesystem::path& path, const Pose& pose);

nlohmann::json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics);

}  // namespace pdg
