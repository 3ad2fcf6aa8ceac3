#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pdgstudio/flow_field.hpp"
#include "pdgstudio/graph.hpp"
#include "pdgstudio/scene.hpp"
#include "pdgstudio/tensor.hpp"

namespace pdg {

inline constexpr int kDefaultFrames = 48;  // T; the video has T + 1 frames
inline constexpr int kDefaultRows = 480;
inline constexpr int kDefaultCols = 720;

enum class Easing { Linear, Smoothstep };

std::string_view to_string(Easing easing);
Easing easing_from_string(std::string_view name);
/// Easing curve on [0, 1]; both curves fix 0, 1/2 and 1.
double ease(Easing easing, double s);

/// Per-frame poses; frame 0 is the rest pose, frame T the target.
struct MotionTimeline {
  std::vector<Pose> poses;
  Easing easing = Easing::Linear;

  std::size_t frame_count() const noexcept { return poses.size(); }
};

/// Throws ArgumentError when `frames` (T) is below 1.
MotionTimeline interpolate_timeline(const Pdg& pdg, const Pose& target, int frames, Easing easing);

/// Node id -> transformed points for one frame.
using NodeClouds = std::map<std::string, std::vector<Vec3>>;

std::vector<NodeClouds> transform_clouds(const Pdg& pdg, const MotionTimeline& timeline);

struct Bounds {
  Vec3 lo;
  Vec3 hi;
};

/// Maps a point to its fixed tracking color.
using Palette = std::function<Rgb(const Vec3& rest, const Rgb& source, const Bounds& rest_bounds)>;

/// x -> R, y -> G, z -> B over the rest bounding box; degenerate extents map to 0.
Rgb rest_position_color(const Vec3& rest, const Rgb& source, const Bounds& rest_bounds);
/// The point's own image color, for re-rendering textured video.
Rgb source_color(const Vec3& rest, const Rgb& source, const Bounds& rest_bounds);

/// Points of one node (or of the static scene) with their colors and projections.
struct TrackLayer {
  std::string node_id;
  bool dynamic = false;
  bool per_frame = true;  // false: one projection shared by every frame
  std::vector<Rgb> colors;
  std::vector<Projection> projections;  // frame-major when per_frame

  std::size_t point_count() const noexcept { return colors.size(); }
};

/// Projected trajectories of every point. Layers are ordered by splat priority:
/// graph nodes by ascending id, then the static scene.
struct Correspondences {
  int rows = 0;
  int cols = 0;
  std::size_t frame_count = 0;
  std::vector<TrackLayer> layers;

  const Projection& at(std::size_t layer, std::size_t frame, std::size_t point) const {
    const TrackLayer& l = layers[layer];
    return l.per_frame ? l.projections[frame * l.point_count() + point] : l.projections[point];
  }
};

/// Splat target of a projection: the nearest pixel, or false when off-image or invalid.
bool nearest_pixel(const Projection& p, int rows, int cols, Pixel& out);

Correspondences project_tracks(const Pdg& pdg, const std::vector<NodeClouds>& clouds, const PointCloud& static_cloud,
                               const CameraModel& camera, const Palette& palette = rest_position_color);

struct PointRef {
  std::int32_t layer = -1;
  std::uint32_t point = 0;
};

/// Nearest point per pixel; equal depths keep the earlier layer, then the lower point index.
struct ZBuffer {
  int rows = 0;
  int cols = 0;
  std::vector<double> depth;
  std::vector<PointRef> owner;

  const PointRef& at(int r, int c) const { return owner[static_cast<std::size_t>(r) * cols + c]; }
};

ZBuffer splat_frame(const Correspondences& tracks, std::size_t frame);
Image render_frame(const Correspondences& tracks, const ZBuffer& zbuffer);

struct TrackingVideo {
  std::vector<Image> frames;
  Correspondences tracks;
};

/// Throws ArgumentError when the scene has no points at all.
TrackingVideo render_tracking(const Pdg& pdg, const std::vector<NodeClouds>& clouds, const PointCloud& static_cloud,
                              const CameraModel& camera, const Palette& palette = rest_position_color);

/// (1+T) x H x W binary volume of pixels revealed by moving parts.
struct DisocclusionMask {
  int frames = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;

  DisocclusionMask() = default;
  DisocclusionMask(int f, int r, int c)
      : frames(f), rows(r), cols(c), data(static_cast<std::size_t>(f) * r * c, 0) {}

  std::uint8_t& at(int t, int r, int c) { return data[(static_cast<std::size_t>(t) * rows + r) * cols + c]; }
  std::uint8_t at(int t, int r, int c) const { return data[(static_cast<std::size_t>(t) * rows + r) * cols + c]; }
  Mask frame(int t) const;
  bool empty() const;
  bool operator==(const DisocclusionMask&) const = default;
};

/// 3x3 closing (dilate then erode); neighbors outside the image are ignored.
Mask close3x3(const Mask& mask);

DisocclusionMask compute_disocclusion(const Correspondences& tracks);
DisocclusionMask compute_disocclusion(const Pdg& pdg, const std::vector<NodeClouds>& clouds,
                                      const PointCloud& static_cloud, const CameraModel& camera);

/// Flow from frame t to t + 1 at every pixel visible at frame t.
FlowField ground_truth_flow(const Correspondences& tracks, std::size_t t);

Tensor4f video_to_tensor(const std::vector<Image>& frames);
std::vector<Image> tensor_to_video(const Tensor4f& tensor);
Tensor4f mask_to_tensor(const DisocclusionMask& mask);
DisocclusionMask tensor_to_mask(const Tensor4f& tensor);
/// Invalid pixels are written as NaN.
Tensor4f flows_to_tensor(const std::vector<FlowField>& flows);
std::vector<FlowField> tensor_to_flows(const Tensor4f& tensor);

/// track_%04d.png frames plus tracking.pdgt.
void write_tracking_video(const std::filesystem::path& dir, const std::vector<Image>& frames);
/// mask_%04d.png frames plus disocclusion.pdgt.
void write_disocclusion(const std::filesystem::path& dir, const DisocclusionMask& mask);
/// flow.pdgt.
void write_flows(const std::filesystem::path& dir, const std::vector<FlowField>& flows);

}  // namespace pdg
