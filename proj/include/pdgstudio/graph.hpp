#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pdgstudio/geometry.hpp"
#include "pdgstudio/raster.hpp"

namespace pdg {

/// Reserved id of the implicit static node holding the unsegmented scene.
inline constexpr std::string_view kStaticRoot = "static";

enum class MotionKind { Translation, Rotation };

std::string_view to_string(MotionKind kind);
MotionKind motion_kind_from_string(std::string_view name);

/// Closed parameter interval; meters for translation, radians for rotation.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// One-degree-of-freedom joint between a parent and a child node.
struct MotionEdge {
  std::string parent;
  std::string child;
  MotionKind kind = MotionKind::Translation;
  Vec3 axis = Vec3::UnitX();
  Vec3 center = Vec3::Zero();
  ParamRange range;
};

/// A segmented part lifted to 3D at rest, in camera coordinates.
struct PartNode {
  std::string id;
  std::vector<Vec3> points;
  std::vector<Pixel> pixel_origin;
  std::vector<Rgb> colors;
  Mask footprint;
  bool movable = false;
};

/// Proxy dynamic graph: a kinematic forest hanging off the static root.
struct Pdg {
  std::vector<PartNode> nodes;
  std::vector<MotionEdge> edges;

  const PartNode* find_node(std::string_view id) const;
  /// The first edge whose child is `id`, or nullptr when the node hangs off the root directly.
  const MotionEdge* incoming_edge(std::string_view id) const;
  /// True when the node hangs below a motion edge or is flagged movable.
  bool is_dynamic(std::string_view id) const;
};

/// Target parameter per child node; missing entries mean the rest value 0.
struct Pose {
  std::map<std::string, double> params;

  double value_or_rest(const std::string& child) const {
    auto it = params.find(child);
    return it == params.end() ? 0.0 : it->second;
  }
  bool operator==(const Pose&) const = default;
};

enum class Violation {
  EmptyNode,
  LengthMismatch,
  OriginOutsideFootprint,
  FootprintShape,
  FootprintOverlap,
  DuplicateNode,
  ReservedId,
  NonFinite,
  NonUnitAxis,
  BadRange,
  SelfLoop,
  UnknownEndpoint,
  MultipleParents,
  Cycle,
};

std::string_view to_string(Violation v);

struct Diagnostic {
  Violation violation;
  std::string subject;  // "node <id>" or "edge <parent>-><child>"
  std::string message;
};

/// Every broken graph invariant; empty iff the graph is well formed.
std::vector<Diagnostic> validate_pdg(const Pdg& pdg);

/// Rigid motion of a single edge at parameter `param`. Throws RangeError when
/// `param` lies outside the edge range.
RigidTransform edge_transform(const MotionEdge& edge, double param);

/// World transform of every node under `pose`, composed parent-first from the root.
std::map<std::string, RigidTransform> forward_kinematics(const Pdg& pdg, const Pose& pose);

/// Clamp every parameter into its edge range. Throws LookupError on unknown keys.
Pose clamp_pose(const Pdg& pdg, const Pose& pose);

}  // namespace pdg
