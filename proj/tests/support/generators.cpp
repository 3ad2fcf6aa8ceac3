#include "generators.hpp"

#include <algorithm>
#include <atomic>
#include <limits>

#include <unistd.h>

namespace gen {

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

}  // namespace

pdg::Vec3 unit_vector(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  pdg::Vec3 v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-3);
  return v.normalized();
}

pdg::Pdg random_forest(Rng& rng, int max_nodes, int max_points) {
  const int count = uniform_int(rng, 1, max_nodes);
  pdg::Pdg pdg;
  for (int i = 0; i < count; ++i) {
    pdg::PartNode node;
    node.id = "n" + std::to_string(i);
    node.footprint = pdg::make_mask(max_nodes, max_points);
    const int points = uniform_int(rng, 1, max_points);
    for (int j = 0; j < points; ++j) {
      node.points.push_back({uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, 0.5, 6)});
      node.pixel_origin.push_back({i, j});
      node.colors.push_back({static_cast<std::uint8_t>(j), 0, 0});
      node.footprint.at(i, j) = 1;
    }
    node.movable = uniform_int(rng, 0, 1) == 1;
    pdg.nodes.push_back(std::move(node));
  }
  for (int i = 0; i < count; ++i) {
    if (uniform_int(rng, 0, 9) < 2) continue;  // hangs off the root without a joint
    pdg::MotionEdge e;
    e.parent = i == 0 || uniform_int(rng, 0, 2) == 0 ? std::string(pdg::kStaticRoot)
                                                      : "n" + std::to_string(uniform_int(rng, 0, i - 1));
    e.child = "n" + std::to_string(i);
    e.kind = uniform_int(rng, 0, 1) ? pdg::MotionKind::Rotation : pdg::MotionKind::Translation;
    e.axis = unit_vector(rng);
    e.center = {uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, 1, 5)};
    e.range = {uniform(rng, -2, 0), uniform(rng, 0, 2)};
    pdg.edges.push_back(e);
  }
  std::shuffle(pdg.nodes.begin(), pdg.nodes.end(), rng);
  std::shuffle(pdg.edges.begin(), pdg.edges.end(), rng);
  return pdg;
}

pdg::Pose random_pose(Rng& rng, const pdg::Pdg& pdg) {
  pdg::Pose pose;
  for (const auto& e : pdg.edges) pose.params[e.child] = uniform(rng, e.range.lo, e.range.hi);
  return pose;
}

std::vector<pdg::Violation> all_violations() {
  using V = pdg::Violation;
  return {V::EmptyNode,   V::LengthMismatch, V::OriginOutsideFootprint, V::FootprintShape, V::FootprintOverlap,
          V::DuplicateNode, V::ReservedId,   V::NonFinite,              V::NonUnitAxis,    V::BadRange,
          V::SelfLoop,    V::UnknownEndpoint, V::MultipleParents,       V::Cycle};
}

pdg::Pdg corrupt(Rng& rng, pdg::Violation kind) {
  using V = pdg::Violation;
  // Four nodes in a chain n0 <- n1 <- n2 plus a free n3, so every injection has room.
  pdg::Pdg pdg;
  for (int i = 0; i < 4; ++i) {
    pdg::PartNode node;
    node.id = "n" + std::to_string(i);
    node.footprint = pdg::make_mask(4, 4);
    for (int j = 0; j < 2; ++j) {
      node.points.push_back({uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 1, 3)});
      node.pixel_origin.push_back({i, j});
      node.colors.push_back({0, 0, 0});
      node.footprint.at(i, j) = 1;
    }
    pdg.nodes.push_back(std::move(node));
  }
  auto edge = [&](std::string parent, std::string child) {
    pdg::MotionEdge e;
    e.parent = std::move(parent);
    e.child = std::move(child);
    e.kind = uniform_int(rng, 0, 1) ? pdg::MotionKind::Rotation : pdg::MotionKind::Translation;
    e.axis = unit_vector(rng);
    e.range = {-1.0, 1.0};
    return e;
  };
  pdg.edges = {edge("static", "n0"), edge("n0", "n1"), edge("n1", "n2")};

  pdg::PartNode& victim = pdg.nodes[uniform_int(rng, 0, 3)];
  pdg::MotionEdge& bad_edge = pdg.edges[uniform_int(rng, 0, 2)];
  switch (kind) {
    case V::EmptyNode:
      victim.points.clear();
      victim.pixel_origin.clear();
      victim.colors.clear();
      break;
    case V::LengthMismatch: victim.colors.pop_back(); break;
    case V::OriginOutsideFootprint: victim.pixel_origin[0] = {3, 3}; break;
    case V::FootprintShape: {
      pdg::Mask taller = pdg::make_mask(5, 4);
      for (const auto& px : victim.pixel_origin) taller.at(px.row, px.col) = 1;
      victim.footprint = taller;
      break;
    }
    case V::FootprintOverlap: pdg.nodes[1].footprint.at(0, 0) = 1; break;
    case V::DuplicateNode: pdg.nodes[3].id = "n" + std::to_string(uniform_int(rng, 0, 2)); break;
    case V::ReservedId: pdg.nodes[3].id = std::string(pdg::kStaticRoot); break;
    case V::NonFinite: victim.points[1].y() = std::numeric_limits<double>::infinity(); break;
    case V::NonUnitAxis: bad_edge.axis *= uniform(rng, 1.01, 3.0); break;
    case V::BadRange: bad_edge.range = {uniform(rng, 0.1, 1.0), 2.0}; break;
    case V::SelfLoop: pdg.edges.push_back(edge("n3", "n3")); break;
    case V::UnknownEndpoint: pdg.edges.push_back(edge("ghost", "n3")); break;
    case V::MultipleParents: pdg.edges.push_back(edge("static", "n" + std::to_string(uniform_int(rng, 1, 2)))); break;
    case V::Cycle:
      // drop the root joint of n0 and close the chain back onto it
      pdg.edges.erase(pdg.edges.begin());
      pdg.edges.push_back(edge(uniform_int(rng, 0, 1) ? "n2" : "n1", "n0"));
      break;
  }
  return pdg;
}

pdg::SynthSpec random_scene(Rng& rng, SceneMotion motion, int width, int height) {
  pdg::SynthSpec spec;
  spec.width = width;
  spec.height = height;
  spec.background_depth = 6.0;
  spec.background_seed = rng();
  const double fx = width, cx = width / 2.0, cy = height / 2.0;
  const int count = uniform_int(rng, 1, 3);
  const double depths[] = {2.0, 3.0, 4.0};
  for (int i = 0; i < count; ++i) {
    pdg::SynthRect rect;
    rect.id = "part" + std::to_string(i);
    // nearer rectangles come first; redraw until some pixel of this one stays visible
    auto hidden = [&] {
      for (int r = rect.row; r < rect.row + rect.rows; ++r)
        for (int c = rect.col; c < rect.col + rect.cols; ++c) {
          bool covered = false;
          for (const auto& p : spec.primitives)
            covered |= r >= p.row && r < p.row + p.rows && c >= p.col && c < p.col + p.cols;
          if (!covered) return false;
        }
      return true;
    };
    do {
      rect.rows = uniform_int(rng, height / 6, height / 2);
      rect.cols = uniform_int(rng, width / 6, width / 2);
      rect.row = uniform_int(rng, 0, height - rect.rows);
      rect.col = uniform_int(rng, 0, width - rect.cols);
    } while (hidden());
    rect.depth = depths[i];
    rect.seed = rng();
    pdg::SynthMotion m;
    if (motion == SceneMotion::Slide) {
      const double angle = uniform(rng, 0.0, 2.0 * 3.141592653589793);
      m.kind = pdg::MotionKind::Translation;
      m.axis = {std::cos(angle), std::sin(angle), 0.0};
      m.range = {-0.5 * rect.depth, 0.5 * rect.depth};
      m.target = uniform(rng, -0.3, 0.3) * rect.depth;
    } else {
      const double crow = rect.row + (rect.rows - 1) / 2.0, ccol = rect.col + (rect.cols - 1) / 2.0;
      m.kind = pdg::MotionKind::Rotation;
      m.axis = pdg::Vec3::UnitZ();
      m.center = {rect.depth * (ccol - cx) / fx, rect.depth * (crow - cy) / fx, rect.depth};
      m.range = {-1.0, 1.0};
      m.target = uniform(rng, -0.8, 0.8);
    }
    rect.motion = m;
    spec.primitives.push_back(rect);
  }
  return spec;
}

pdg::Image textured_image(int rows, int cols, std::uint64_t seed) {
  pdg::Image img = pdg::make_image(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const pdg::Rgb px = pdg::texture_color(seed, r, c);
      for (int k = 0; k < 3; ++k) img.at(r, c, k) = px[k];
    }
  return img;
}

pdg::Image shifted(const pdg::Image& image, int dcol, int drow) {
  pdg::Image out = pdg::make_image(image.rows(), image.cols());
  for (int r = 0; r < image.rows(); ++r)
    for (int c = 0; c < image.cols(); ++c) {
      const int sr = std::clamp(r - drow, 0, image.rows() - 1), sc = std::clamp(c - dcol, 0, image.cols() - 1);
      for (int k = 0; k < 3; ++k) out.at(r, c, k) = image.at(sr, sc, k);
    }
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace gen
