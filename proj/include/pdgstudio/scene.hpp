#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdgstudio/geometry.hpp"
#include "pdgstudio/raster.hpp"

namespace pdg {

/// Pinhole camera. `extrinsic` maps world coordinates into the camera frame.
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  RigidTransform extrinsic;

  /// Throws SceneError(Malformed) when focal lengths or the principal point are invalid.
  void check() const;
};

/// The measured substrate a graph is authored on.
struct Scene {
  Image image;
  DepthMap depth;
  CameraModel camera;
  std::map<std::string, Mask> part_masks;
  /// Optional external segmentation/depth tool command recorded in the manifest; never executed.
  std::optional<std::string> external_tool;
};

/// Points lifted from masked pixels, in row-major pixel order.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Pixel> pixel_origin;
  std::vector<Rgb> colors;

  std::size_t size() const noexcept { return points.size(); }
};

struct Projection {
  double row = 0.0;
  double col = 0.0;
  double depth = 0.0;
  bool valid = false;
};

inline bool valid_depth(float d) { return std::isfinite(d) && d > 0.0f; }

/// Lift every masked pixel through the camera. Throws SceneError(InvalidDepth)
/// listing masked pixels without valid depth.
PointCloud unproject(const DepthMap& depth, const Image& image, const CameraModel& camera, const Mask& mask);

Projection project_point(const Vec3& point, const CameraModel& camera);
/// Pinhole projection; points at or behind the camera plane come back invalid.
std::vector<Projection> project(std::span<const Vec3> points, const CameraModel& camera);

/// Checks every Scene invariant, throwing the matching SceneError.
void validate_scene(const Scene& scene);

Scene load_scene(const std::filesystem::path& manifest);
/// Writes image.png, depth.pfm, camera.json, one mask PNG per part and scene.json.
/// Returns the manifest path.
std::filesystem::path save_scene(const Scene& scene, const std::filesystem::path& dir);
/// File name save_scene() uses for the mask at position `index` in id order.
std::string mask_file_name(int index, const std::string& id);

CameraModel camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraModel& camera);

/// Every pixel outside `occupied` that has valid depth, lifted like unproject().
PointCloud lift_unoccupied(const Scene& scene, const Mask& occupied);

}  // namespace pdg
