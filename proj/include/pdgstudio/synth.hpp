#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdgstudio/document.hpp"
#include "pdgstudio/graph.hpp"
#include "pdgstudio/scene.hpp"

namespace pdg {

struct SynthMotion {
  std::string parent{kStaticRoot};
  MotionKind kind = MotionKind::Translation;
  Vec3 axis = Vec3::UnitX();
  Vec3 center = Vec3::Zero();
  ParamRange range;
  std::optional<double> target;
};

/// Fronto-parallel textured rectangle covering rows [row, row + rows) and
/// cols [col, col + cols) at constant depth.
struct SynthRect {
  std::string id;
  int row = 0;
  int col = 0;
  int rows = 0;
  int cols = 0;
  double depth = 1.0;
  std::uint64_t seed = 0;
  std::optional<SynthMotion> motion;
};

struct SynthSpec {
  int width = 0;
  int height = 0;
  std::optional<double> fx, fy, cx, cy;  // default: fx = fy = width, principal point at (height/2, width/2)
  std::optional<double> background_depth;
  std::uint64_t background_seed = 0;
  std::vector<SynthRect> primitives;
};

struct SynthResult {
  Scene scene;
  Pdg pdg;
  PdgDocument document;  // footprint paths follow save_scene() naming
  Pose target;
};

SynthSpec parse_synth_spec(const nlohmann::json& j);

/// Exact image, depth, masks and matching graph for a list of rectangles.
/// Throws SceneError(OverlappingPrimitives) when two rectangles overlap at equal depth.
SynthResult synth_scene(const SynthSpec& spec);

/// Writes the scene files plus pdg.json and pose.json into `dir`; returns the scene manifest path.
std::filesystem::path write_synth(const SynthResult& result, const std::filesystem::path& dir);

/// Deterministic per-pixel texture color.
Rgb texture_color(std::uint64_t seed, int row, int col);

}  // namespace pdg
