#include "oracles.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <tuple>

namespace oracle {

Mat4 edge_matrix(const pdg::MotionEdge& edge, double param) {
  Mat4 m = Mat4::Identity();
  if (edge.kind == pdg::MotionKind::Translation) {
    m.block<3, 1>(0, 3) = param * edge.axis;
    return m;
  }
  Mat4 to_origin = Mat4::Identity(), back = Mat4::Identity(), rot = Mat4::Identity();
  to_origin.block<3, 1>(0, 3) = -edge.center;
  back.block<3, 1>(0, 3) = edge.center;
  rot.block<3, 3>(0, 0) = Eigen::AngleAxisd(param, edge.axis).toRotationMatrix();
  return back * rot * to_origin;
}

std::map<std::string, Mat4> forward_kinematics(const pdg::Pdg& pdg, const pdg::Pose& pose) {
  std::map<std::string, Mat4> out;
  for (const auto& node : pdg.nodes) {
    std::vector<const pdg::MotionEdge*> chain;
    std::string cur = node.id;
    while (cur != pdg::kStaticRoot) {
      const pdg::MotionEdge* in = nullptr;
      for (const auto& e : pdg.edges)
        if (e.child == cur) in = &e;
      if (!in) break;
      chain.push_back(in);
      cur = in->parent;
    }
    Mat4 world = Mat4::Identity();
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      auto p = pose.params.find((*it)->child);
      world = world * edge_matrix(**it, p == pose.params.end() ? 0.0 : p->second);
    }
    out[node.id] = world;
  }
  return out;
}

Mat4 to_matrix(const pdg::RigidTransform& x) {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = x.rotation;
  m.block<3, 1>(0, 3) = x.translation;
  return m;
}

PixelHit project(const Eigen::Vector3d& point, const pdg::CameraModel& camera) {
  Eigen::Matrix<double, 3, 4> k_rt;
  Eigen::Matrix3d k;
  k << camera.fx, 0, camera.cx, 0, camera.fy, camera.cy, 0, 0, 1;
  k_rt.block<3, 3>(0, 0) = k * camera.extrinsic.rotation;
  k_rt.block<3, 1>(0, 3) = k * camera.extrinsic.translation;
  const Eigen::Vector3d h = k_rt * point.homogeneous();
  PixelHit hit;
  if (!(h.z() > 0.0)) return hit;
  const double col = h.x() / h.z(), row = h.y() / h.z();
  hit.col = static_cast<int>(std::floor(col + 0.5));
  hit.row = static_cast<int>(std::floor(row + 0.5));
  hit.depth = h.z();
  hit.valid = hit.row >= 0 && hit.row < camera.height && hit.col >= 0 && hit.col < camera.width;
  return hit;
}

pdg::Mask close3x3(const pdg::Mask& mask) {
  const int rows = mask.rows(), cols = mask.cols();
  auto neighbours = [&](int r, int c) {
    std::vector<std::pair<int, int>> out;
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc)
        if (r + dr >= 0 && r + dr < rows && c + dc >= 0 && c + dc < cols) out.emplace_back(r + dr, c + dc);
    return out;
  };
  pdg::Mask dilated = pdg::make_mask(rows, cols), closed = pdg::make_mask(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      for (auto [nr, nc] : neighbours(r, c))
        if (mask.at(nr, nc)) dilated.at(r, c) = 1;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      bool all = true;
      for (auto [nr, nc] : neighbours(r, c)) all = all && dilated.at(nr, nc);
      closed.at(r, c) = all ? 1 : 0;
    }
  return closed;
}

Coverage coverage(const pdg::Pdg& pdg, const pdg::PointCloud& static_cloud, const pdg::CameraModel& camera,
                  const std::vector<pdg::Pose>& poses) {
  std::vector<const pdg::PartNode*> nodes;
  for (const auto& n : pdg.nodes) nodes.push_back(&n);
  std::sort(nodes.begin(), nodes.end(), [](auto* a, auto* b) { return a->id < b->id; });

  Coverage cov;
  for (auto* n : nodes) {
    cov.layer_ids.push_back(n->id);
    bool has_parent = false;
    for (const auto& e : pdg.edges) has_parent = has_parent || e.child == n->id;
    cov.dynamic.push_back(has_parent || n->movable);
  }
  cov.layer_ids.push_back("");
  cov.dynamic.push_back(false);
  const std::size_t static_layer = nodes.size();

  const int rows = camera.height, cols = camera.width;
  for (std::size_t t = 0; t < poses.size(); ++t) {
    const auto world = oracle::forward_kinematics(pdg, poses[t]);
    // candidates per pixel: (depth, layer, point index)
    std::vector<std::vector<std::tuple<double, std::size_t, std::size_t>>> cand(static_cast<std::size_t>(rows) * cols);
    auto add = [&](const Eigen::Vector3d& p, std::size_t layer, std::size_t index) {
      const PixelHit h = project(p, camera);
      if (h.valid) cand[static_cast<std::size_t>(h.row) * cols + h.col].emplace_back(h.depth, layer, index);
    };
    for (std::size_t l = 0; l < nodes.size(); ++l) {
      const Mat4& m = world.at(nodes[l]->id);
      for (std::size_t i = 0; i < nodes[l]->points.size(); ++i) {
        const Eigen::Vector3d& rest = nodes[l]->points[i];
        add(t == 0 ? rest : Eigen::Vector3d((m * rest.homogeneous()).head<3>()), l, i);
      }
    }
    for (std::size_t i = 0; i < static_cloud.points.size(); ++i) add(static_cloud.points[i], static_layer, i);

    std::vector<pdg::Mask> layers(cov.layer_ids.size(), pdg::make_mask(rows, cols));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const auto& list = cand[static_cast<std::size_t>(r) * cols + c];
        if (list.empty()) continue;
        const auto best = *std::min_element(list.begin(), list.end());
        layers[std::get<1>(best)].at(r, c) = 1;
      }
    cov.per_frame.push_back(std::move(layers));
  }
  return cov;
}

pdg::DisocclusionMask disocclusion(const pdg::Pdg& pdg, const pdg::PointCloud& static_cloud,
                                   const pdg::CameraModel& camera, const std::vector<pdg::Pose>& poses) {
  const Coverage cov = coverage(pdg, static_cloud, camera, poses);
  const int rows = camera.height, cols = camera.width;
  pdg::DisocclusionMask out(static_cast<int>(poses.size()), rows, cols);
  for (std::size_t t = 0; t < poses.size(); ++t) {
    pdg::Mask moved = pdg::make_mask(rows, cols);
    for (std::size_t l = 0; l < cov.layer_ids.size(); ++l) {
      if (!cov.dynamic[l]) continue;
      const pdg::Mask closed = oracle::close3x3(cov.per_frame[t][l]);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          if (closed.at(r, c)) moved.at(r, c) = 1;
    }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        bool rest = false;
        for (std::size_t l = 0; l < cov.layer_ids.size(); ++l) rest = rest || (cov.dynamic[l] && cov.per_frame[0][l].at(r, c));
        out.at(static_cast<int>(t), r, c) = rest && !moved.at(r, c) ? 1 : 0;
      }
  }
  return out;
}

std::vector<float> pool_mask_max(const pdg::DisocclusionMask& mask) {
  const int lf = 1 + (mask.frames - 1) / 4, lr = mask.rows / 8, lc = mask.cols / 8;
  std::vector<float> out(static_cast<std::size_t>(lf) * lr * lc, 0.0f);
  for (int t = 0; t < mask.frames; ++t)
    for (int r = 0; r < mask.rows; ++r)
      for (int c = 0; c < mask.cols; ++c) {
        if (!mask.at(t, r, c)) continue;
        const int k = t == 0 ? 0 : (t + 3) / 4;
        out[(static_cast<std::size_t>(k) * lr + r / 8) * lc + c / 8] = 1.0f;
      }
  return out;
}

}  // namespace oracle
