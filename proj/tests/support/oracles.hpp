#pragma once

// Reference implementations used only by tests. They follow the written
// definitions directly and share no code with the library beyond its data types.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "pdgstudio/graph.hpp"
#include "pdgstudio/motion.hpp"
#include "pdgstudio/scene.hpp"

namespace oracle {

using Mat4 = Eigen::Matrix4d;

/// Homogeneous matrix of one edge, built from Eigen::AngleAxis.
Mat4 edge_matrix(const pdg::MotionEdge& edge, double param);

/// World matrix per node: walks each chain to the root and multiplies 4x4 matrices.
std::map<std::string, Mat4> forward_kinematics(const pdg::Pdg& pdg, const pdg::Pose& pose);

Mat4 to_matrix(const pdg::RigidTransform& x);

struct PixelHit {
  bool valid = false;
  int row = 0;
  int col = 0;
  double depth = 0.0;
};

/// K [R | t] p in homogeneous form, rounded to the nearest pixel centre.
PixelHit project(const Eigen::Vector3d& point, const pdg::CameraModel& camera);

/// 3x3 closing straight from the definition; out-of-image neighbours are ignored.
pdg::Mask close3x3(const pdg::Mask& mask);

/// Per-pixel z-buffer coverage: for every frame and layer, the pixels where that
/// layer owns the nearest point. Layers: nodes by id, then the static cloud.
struct Coverage {
  std::vector<std::string> layer_ids;  // "" for the static cloud
  std::vector<bool> dynamic;
  std::vector<std::vector<pdg::Mask>> per_frame;  // [frame][layer]
};

Coverage coverage(const pdg::Pdg& pdg, const pdg::PointCloud& static_cloud, const pdg::CameraModel& camera,
                  const std::vector<pdg::Pose>& poses);

/// Rest coverage of dynamic layers minus the union of their closed coverage at t.
pdg::DisocclusionMask disocclusion(const pdg::Pdg& pdg, const pdg::PointCloud& static_cloud,
                                   const pdg::CameraModel& camera, const std::vector<pdg::Pose>& poses);

/// Latent mask by enumerating every pixel-frame and writing to its cell.
std::vector<float> pool_mask_max(const pdg::DisocclusionMask& mask);

}  // namespace oracle
