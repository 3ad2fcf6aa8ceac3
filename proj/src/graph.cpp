#include "pdgstudio/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace pdg {

Mat3 rodrigues(const Vec3& axis, double angle) {
  Mat3 k;
  k << 0.0, -axis.z(), axis.y(),
       axis.z(), 0.0, -axis.x(),
       -axis.y(), axis.x(), 0.0;
  return Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * (k * k);
}

std::string_view to_string(MotionKind kind) {
  return kind == MotionKind::Translation ? "translation" : "rotation";
}

MotionKind motion_kind_from_string(std::string_view name) {
  if (name == "translation") return MotionKind::Translation;
  if (name == "rotation") return MotionKind::Rotation;
  throw DocumentError("unknown motion kind '" + std::string(name) + "'");
}

std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::EmptyNode: return "empty-node";
    case Violation::LengthMismatch: return "length-mismatch";
    case Violation::OriginOutsideFootprint: return "origin-outside-footprint";
    case Violation::FootprintShape: return "footprint-shape";
    case Violation::FootprintOverlap: return "footprint-overlap";
    case Violation::DuplicateNode: return "duplicate-node";
    case Violation::ReservedId: return "reserved-id";
    case Violation::NonFinite: return "non-finite";
    case Violation::NonUnitAxis: return "non-unit-axis";
    case Violation::BadRange: return "bad-range";
    case Violation::SelfLoop: return "self-loop";
    case Violation::UnknownEndpoint: return "unknown-endpoint";
    case Violation::MultipleParents: return "multiple-parents";
    case Violation::Cycle: return "cycle";
  }
  return "unknown";
}

const PartNode* Pdg::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

const MotionEdge* Pdg::incoming_edge(std::string_view id) const {
  for (const auto& e : edges)
    if (e.child == id) return &e;
  return nullptr;
}

bool Pdg::is_dynamic(std::string_view id) const {
  // Any node below an edge rides that edge; nodes hanging directly off the root
  // move only when flagged.
  const PartNode* node = find_node(id);
  if (node && node->movable) return true;
  return incoming_edge(id) != nullptr;
}

namespace {

std::string edge_subject(const MotionEdge& e) { return "edge " + e.parent + "->" + e.child; }

bool finite(const Vec3& v) { return v.allFinite(); }

void check_nodes(const Pdg& pdg, std::vector<Diagnostic>& out) {
  std::set<std::string> seen;
  const Mask* reference = nullptr;
  for (const auto& node : pdg.nodes) {
    const std::string subject = "node " + node.id;
    if (node.id == kStaticRoot)
      out.push_back({Violation::ReservedId, subject, "id is reserved for the static root"});
    if (!seen.insert(node.id).second)
      out.push_back({Violation::DuplicateNode, subject, "id appears more than once"});
    if (node.points.empty()) {
      out.push_back({Violation::EmptyNode, subject, "node has no points"});
    } else if (node.points.size() != node.pixel_origin.size() || node.points.size() != node.colors.size()) {
      std::ostringstream msg;
      msg << "points/pixel_origin/colors lengths differ (" << node.points.size() << "/"
          << node.pixel_origin.size() << "/" << node.colors.size() << ")";
      out.push_back({Violation::LengthMismatch, subject, msg.str()});
    }
    if (std::any_of(node.points.begin(), node.points.end(), [](const Vec3& p) { return !finite(p); }))
      out.push_back({Violation::NonFinite, subject, "point coordinates must be finite"});

    if (!reference) {
      reference = &node.footprint;
    } else if (!node.footprint.same_shape(*reference)) {
      out.push_back({Violation::FootprintShape, subject, "footprint size differs from other nodes"});
      continue;
    }
    for (const auto& px : node.pixel_origin) {
      if (!node.footprint.contains(px.row, px.col) || !node.footprint.at(px.row, px.col)) {
        std::ostringstream msg;
        msg << "pixel origin (" << px.row << ", " << px.col << ") lies outside the footprint";
        out.push_back({Violation::OriginOutsideFootprint, subject, msg.str()});
        break;
      }
    }
  }

  if (!reference) return;
  // Pairwise disjointness via an owner raster.
  std::vector<int> owner(static_cast<std::size_t>(reference->rows()) * reference->cols(), -1);
  std::set<std::pair<int, int>> reported;
  for (int i = 0; i < static_cast<int>(pdg.nodes.size()); ++i) {
    const Mask& fp = pdg.nodes[i].footprint;
    if (!fp.same_shape(*reference)) continue;
    for (int r = 0; r < fp.rows(); ++r)
      for (int c = 0; c < fp.cols(); ++c) {
        if (!fp.at(r, c)) continue;
        int& o = owner[static_cast<std::size_t>(r) * fp.cols() + c];
        if (o < 0) {
          o = i;
        } else if (reported.insert({o, i}).second) {
          std::ostringstream msg;
          msg << "footprint overlaps node " << pdg.nodes[o].id << " at pixel (" << r << ", " << c << ")";
          out.push_back({Violation::FootprintOverlap, "node " + pdg.nodes[i].id, msg.str()});
        }
      }
  }
}

bool known(const Pdg& pdg, const std::string& id) { return id == kStaticRoot || pdg.find_node(id); }

void check_edges(const Pdg& pdg, std::vector<Diagnostic>& out) {
  for (const auto& e : pdg.edges) {
    const std::string subject = edge_subject(e);
    if (e.child == e.parent) out.push_back({Violation::SelfLoop, subject, "edge connects a node to itself"});
    if (!known(pdg, e.parent))
      out.push_back({Violation::UnknownEndpoint, subject, "parent '" + e.parent + "' does not exist"});
    if (e.child == kStaticRoot)
      out.push_back({Violation::UnknownEndpoint, subject, "the static root cannot be a child"});
    else if (!pdg.find_node(e.child))
      out.push_back({Violation::UnknownEndpoint, subject, "child '" + e.child + "' does not exist"});

    if (!finite(e.axis) || !finite(e.center)) {
      out.push_back({Violation::NonFinite, subject, "axis and center must be finite"});
    } else if (std::abs(e.axis.norm() - 1.0) > 1e-9) {
      std::ostringstream msg;
      msg << "axis norm is " << e.axis.norm() << ", expected 1";
      out.push_back({Violation::NonUnitAxis, subject, msg.str()});
    }
    if (!std::isfinite(e.range.lo) || !std::isfinite(e.range.hi) || e.range.lo > 0.0 || e.range.hi < 0.0) {
      std::ostringstream msg;
      msg << "range [" << e.range.lo << ", " << e.range.hi << "] must satisfy lo <= 0 <= hi";
      out.push_back({Violation::BadRange, subject, msg.str()});
    }
  }
}

void check_topology(const Pdg& pdg, std::vector<Diagnostic>& out) {
  std::map<std::string, std::vector<std::string>> children;
  std::map<std::string, int> indegree;
  for (const auto& e : pdg.edges) {
    if (e.child == e.parent || !known(pdg, e.parent) || !pdg.find_node(e.child)) continue;
    children[e.parent].push_back(e.child);
    ++indegree[e.child];
  }
  for (const auto& [id, n] : indegree)
    if (n > 1)
      out.push_back({Violation::MultipleParents, "node " + id,
                     "node has " + std::to_string(n) + " incoming edges"});

  // A node lies on a cycle iff it reaches itself; group such nodes by mutual reachability.
  auto reachable_from = [&](const std::string& start) {
    std::set<std::string> seen;
    std::vector<std::string> stack = children.count(start) ? children.at(start) : std::vector<std::string>{};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur).second) continue;
      if (auto it = children.find(cur); it != children.end())
        stack.insert(stack.end(), it->second.begin(), it->second.end());
    }
    return seen;
  };
  std::set<std::string> assigned;
  for (const auto& node : pdg.nodes) {
    if (assigned.count(node.id)) continue;
    auto reach = reachable_from(node.id);
    if (!reach.count(node.id)) continue;
    std::vector<std::string> members;
    for (const auto& other : reach)
      if (reachable_from(other).count(node.id)) members.push_back(other);
    std::sort(members.begin(), members.end());
    std::string list;
    for (const auto& m : members) {
      assigned.insert(m);
      list += (list.empty() ? "" : ", ") + m;
    }
    out.push_back({Violation::Cycle, "nodes " + list, "edges form a cycle through " + list});
  }
}

}  // namespace

std::vector<Diagnostic> validate_pdg(const Pdg& pdg) {
  std::vector<Diagnostic> out;
  check_nodes(pdg, out);
  check_edges(pdg, out);
  check_topology(pdg, out);
  return out;
}

RigidTransform edge_transform(const MotionEdge& edge, double param) {
  if (!std::isfinite(param) || !edge.range.contains(param)) {
    std::ostringstream msg;
    msg << edge_subject(edge) << ": parameter " << param << " outside range [" << edge.range.lo << ", "
        << edge.range.hi << "]";
    throw RangeError(msg.str());
  }
  RigidTransform t;
  if (edge.kind == MotionKind::Translation) {
    t.translation = param * edge.axis;
  } else {
    t.rotation = rodrigues(edge.axis, param);
    t.translation = edge.center - t.rotation * edge.center;
  }
  return t;
}

std::map<std::string, RigidTransform> forward_kinematics(const Pdg& pdg, const Pose& pose) {
  for (const auto& [id, value] : pose.params)
    if (!pdg.incoming_edge(id)) throw LookupError("pose names '" + id + "', which is not the child of any edge");

  std::map<std::string, RigidTransform> world;
  std::set<std::string> visiting;
  std::function<RigidTransform(const std::string&)> resolve = [&](const std::string& id) -> RigidTransform {
    if (id == kStaticRoot) return RigidTransform::identity();
    if (auto it = world.find(id); it != world.end()) return it->second;
    if (!visiting.insert(id).second) throw ArgumentError("kinematic cycle through node '" + id + "'");
    RigidTransform result;
    if (const MotionEdge* e = pdg.incoming_edge(id))
      result = resolve(e->parent) * edge_transform(*e, pose.value_or_rest(id));
    visiting.erase(id);
    world.emplace(id, result);
    return result;
  };
  for (const auto& node : pdg.nodes) resolve(node.id);
  return world;
}

Pose clamp_pose(const Pdg& pdg, const Pose& pose) {
  Pose out;
  for (const auto& [id, value] : pose.params) {
    const MotionEdge* e = pdg.incoming_edge(id);
    if (!e) throw LookupError("pose names '" + id + "', which is not the child of any edge");
    if (std::isnan(value)) throw ArgumentError("pose parameter for '" + id + "' is NaN");
    out.params[id] = std::clamp(value, e->range.lo, e->range.hi);
  }
  return out;
}

}  // namespace pdg
