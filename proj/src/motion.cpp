#include "pdgstudio/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pdgstudio/image_io.hpp"

namespace pdg {

namespace fs = std::filesystem;

std::string_view to_string(Easing easing) { return easing == Easing::Linear ? "linear" : "smoothstep"; }

Easing easing_from_string(std::string_view name) {
  if (name == "linear") return Easing::Linear;
  if (name == "smoothstep") return Easing::Smoothstep;
  throw ArgumentError("unknown easing '" + std::string(name) + "' (expected linear or smoothstep)");
}

double ease(Easing easing, double s) {
  s = std::clamp(s, 0.0, 1.0);
  return easing == Easing::Linear ? s : s * s * (3.0 - 2.0 * s);
}

MotionTimeline interpolate_timeline(const Pdg& pdg, const Pose& target, int frames, Easing easing) {
  if (frames < 1) throw ArgumentError("timeline needs T >= 1, got " + std::to_string(frames));
  const Pose clamped = clamp_pose(pdg, target);
  MotionTimeline timeline;
  timeline.easing = easing;
  timeline.poses.resize(static_cast<std::size_t>(frames) + 1);
  for (int t = 1; t <= frames; ++t) {
    const double s = t == frames ? 1.0 : ease(easing, static_cast<double>(t) / frames);
    for (const auto& [id, value] : clamped.params) timeline.poses[t].params[id] = value * s;
  }
  return timeline;
}

std::vector<NodeClouds> transform_clouds(const Pdg& pdg, const MotionTimeline& timeline) {
  std::vector<NodeClouds> out(timeline.frame_count());
  for (std::size_t t = 0; t < timeline.frame_count(); ++t) {
    if (t == 0) {
      for (const auto& node : pdg.nodes) out[0][node.id] = node.points;
      continue;
    }
    const auto world = forward_kinematics(pdg, timeline.poses[t]);
    for (const auto& node : pdg.nodes) {
      const RigidTransform& x = world.at(node.id);
      auto& dst = out[t][node.id];
      dst.reserve(node.points.size());
      for (const auto& p : node.points) dst.push_back(x.apply(p));
    }
  }
  return out;
}

Rgb rest_position_color(const Vec3& rest, const Rgb&, const Bounds& b) {
  Rgb out{};
  for (int k = 0; k < 3; ++k) {
    const double extent = b.hi[k] - b.lo[k];
    const double v = extent > 0.0 ? std::clamp((rest[k] - b.lo[k]) / extent, 0.0, 1.0) : 0.0;
    out[k] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return out;
}

Rgb source_color(const Vec3&, const Rgb& source, const Bounds&) { return source; }

bool nearest_pixel(const Projection& p, int rows, int cols, Pixel& out) {
  if (!p.valid) return false;
  const double r = std::floor(p.row + 0.5), c = std::floor(p.col + 0.5);
  if (!(r >= 0.0 && c >= 0.0 && r < rows && c < cols)) return false;
  out = {static_cast<int>(r), static_cast<int>(c)};
  return true;
}

Correspondences project_tracks(const Pdg& pdg, const std::vector<NodeClouds>& clouds, const PointCloud& static_cloud,
                               const CameraModel& camera, const Palette& palette) {
  if (clouds.empty()) throw ArgumentError("no frames to project");
  Bounds bounds{Vec3::Constant(std::numeric_limits<double>::infinity()),
                Vec3::Constant(-std::numeric_limits<double>::infinity())};
  std::size_t total = 0;
  auto grow = [&](const Vec3& p) {
    bounds.lo = bounds.lo.cwiseMin(p);
    bounds.hi = bounds.hi.cwiseMax(p);
    ++total;
  };
  for (const auto& [id, pts] : clouds.front())
    for (const auto& p : pts) grow(p);
  for (const auto& p : static_cloud.points) grow(p);
  if (total == 0) throw ArgumentError("cannot render an empty scene");

  Correspondences tracks;
  tracks.rows = camera.height;
  tracks.cols = camera.width;
  tracks.frame_count = clouds.size();
  for (const auto& [id, rest] : clouds.front()) {
    const PartNode* node = pdg.find_node(id);
    if (!node) throw LookupError("cloud for unknown node '" + id + "'");
    TrackLayer layer;
    layer.node_id = id;
    layer.dynamic = pdg.is_dynamic(id);
    layer.colors.reserve(rest.size());
    for (std::size_t i = 0; i < rest.size(); ++i) layer.colors.push_back(palette(rest[i], node->colors[i], bounds));
    layer.projections.reserve(rest.size() * clouds.size());
    for (const auto& frame : clouds) {
      const auto& pts = frame.at(id);
      if (pts.size() != rest.size()) throw ShapeError("node '" + id + "' changes point count across frames");
      for (const auto& p : pts) layer.projections.push_back(project_point(p, camera));
    }
    tracks.layers.push_back(std::move(layer));
  }
  TrackLayer background;
  background.node_id = std::string(kStaticRoot);
  background.per_frame = false;
  for (std::size_t i = 0; i < static_cloud.size(); ++i)
    background.colors.push_back(palette(static_cloud.points[i], static_cloud.colors[i], bounds));
  background.projections = project(static_cloud.points, camera);
  tracks.layers.push_back(std::move(background));
  return tracks;
}

ZBuffer splat_frame(const Correspondences& tracks, std::size_t frame) {
  ZBuffer zb;
  zb.rows = tracks.rows;
  zb.cols = tracks.cols;
  const std::size_t n = static_cast<std::size_t>(zb.rows) * zb.cols;
  zb.depth.assign(n, std::numeric_limits<double>::infinity());
  zb.owner.assign(n, PointRef{});
  for (std::size_t l = 0; l < tracks.layers.size(); ++l) {
    const std::size_t count = tracks.layers[l].point_count();
    for (std::size_t i = 0; i < count; ++i) {
      const Projection& p = tracks.at(l, frame, i);
      Pixel px;
      if (!nearest_pixel(p, zb.rows, zb.cols, px)) continue;
      const std::size_t idx = static_cast<std::size_t>(px.row) * zb.cols + px.col;
      if (p.depth < zb.depth[idx]) {
        zb.depth[idx] = p.depth;
        zb.owner[idx] = {static_cast<std::int32_t>(l), static_cast<std::uint32_t>(i)};
      }
    }
  }
  return zb;
}

Image render_frame(const Correspondences& tracks, const ZBuffer& zb) {
  Image img = make_image(zb.rows, zb.cols);
  for (int r = 0; r < zb.rows; ++r)
    for (int c = 0; c < zb.cols; ++c) {
      const PointRef& ref = zb.at(r, c);
      if (ref.layer < 0) continue;
      const Rgb& rgb = tracks.layers[ref.layer].colors[ref.point];
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = rgb[ch];
    }
  return img;
}

TrackingVideo render_tracking(const Pdg& pdg, const std::vector<NodeClouds>& clouds, const PointCloud& static_cloud,
                              const CameraModel& camera, const Palette& palette) {
  TrackingVideo video;
  video.tracks = project_tracks(pdg, clouds, static_cloud, camera, palette);
  video.frames.reserve(clouds.size());
  for (std::size_t t = 0; t < clouds.size(); ++t) video.frames.push_back(render_frame(video.tracks, splat_frame(video.tracks, t)));
  return video;
}

Mask DisocclusionMask::frame(int t) const {
  Mask m = make_mask(rows, cols);
  std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(t) * rows * cols, static_cast<std::size_t>(rows) * cols,
              m.data().begin());
  return m;
}

bool DisocclusionMask::empty() const {
  return std::none_of(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; });
}

namespace {

struct Window {
  int r0, r1, c0, c1;  // inclusive
};

// Closing restricted to `w`. In-image pixels outside `w` read as clear, so when
// `w` reaches two pixels past every set pixel the result equals a full-image closing.
void close_in_window(const Mask& mask, const Window& w, Mask& dilated, Mask& out) {
  const int rows = mask.rows(), cols = mask.cols();
  auto inside = [&](int r, int c) { return r >= w.r0 && r <= w.r1 && c >= w.c0 && c <= w.c1; };
  for (int r = w.r0; r <= w.r1; ++r)
    for (int c = w.c0; c <= w.c1; ++c) {
      std::uint8_t v = 0;
      for (int dr = -1; dr <= 1 && !v; ++dr)
        for (int dc = -1; dc <= 1 && !v; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (inside(rr, cc) && mask.at(rr, cc)) v = 1;
        }
      dilated.at(r, c) = v;
    }
  for (int r = w.r0; r <= w.r1; ++r)
    for (int c = w.c0; c <= w.c1; ++c) {
      std::uint8_t v = dilated.at(r, c);
      for (int dr = -1; dr <= 1 && v; ++dr)
        for (int dc = -1; dc <= 1 && v; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
          if (!inside(rr, cc) || !dilated.at(rr, cc)) v = 0;
        }
      out.at(r, c) = v;
    }
}

}  // namespace

Mask close3x3(const Mask& mask) {
  Mask dilated = make_mask(mask.rows(), mask.cols());
  Mask out = make_mask(mask.rows(), mask.cols());
  if (mask.empty()) return out;
  close_in_window(mask, {0, mask.rows() - 1, 0, mask.cols() - 1}, dilated, out);
  return out;
}

DisocclusionMask compute_disocclusion(const Correspondences& tracks) {
  const int rows = tracks.rows, cols = tracks.cols;
  DisocclusionMask volume(static_cast<int>(tracks.frame_count), rows, cols);
  if (tracks.frame_count == 0) return volume;

  auto dynamic = [&](const PointRef& ref) { return ref.layer >= 0 && tracks.layers[ref.layer].dynamic; };
  const ZBuffer rest = splat_frame(tracks, 0);
  Mask layer_mask = make_mask(rows, cols), dilated = make_mask(rows, cols), closed = make_mask(rows, cols);
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(rows) * cols);

  for (std::size_t t = 1; t < tracks.frame_count; ++t) {
    const ZBuffer zb = splat_frame(tracks, t);
    std::fill(covered.begin(), covered.end(), 0);
    for (std::size_t l = 0; l < tracks.layers.size(); ++l) {
      if (!tracks.layers[l].dynamic) continue;
      Window box{rows, -1, cols, -1};
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
          if (zb.at(r, c).layer == static_cast<std::int32_t>(l)) {
            box = {std::min(box.r0, r), std::max(box.r1, r), std::min(box.c0, c), std::max(box.c1, c)};
          }
      if (box.r1 < 0) continue;
      const Window w{std::max(0, box.r0 - 2), std::min(rows - 1, box.r1 + 2), std::max(0, box.c0 - 2),
                     std::min(cols - 1, box.c1 + 2)};
      for (int r = w.r0; r <= w.r1; ++r)
        for (int c = w.c0; c <= w.c1; ++c) layer_mask.at(r, c) = zb.at(r, c).layer == static_cast<std::int32_t>(l);
      close_in_window(layer_mask, w, dilated, closed);
      for (int r = w.r0; r <= w.r1; ++r)
        for (int c = w.c0; c <= w.c1; ++c) {
          if (closed.at(r, c)) covered[static_cast<std::size_t>(r) * cols + c] = 1;
          layer_mask.at(r, c) = 0;
        }
    }
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        volume.at(static_cast<int>(t), r, c) =
            dynamic(rest.at(r, c)) && !covered[static_cast<std::size_t>(r) * cols + c] ? 1 : 0;
  }
  return volume;
}

DisocclusionMask compute_disocclusion(const Pdg& pdg, const std::vector<NodeClouds>& clouds,
                                      const PointCloud& static_cloud, const CameraModel& camera) {
  return compute_disocclusion(project_tracks(pdg, clouds, static_cloud, camera));
}

FlowField ground_truth_flow(const Correspondences& tracks, std::size_t t) {
  if (t + 1 >= tracks.frame_count)
    throw ArgumentError("flow frame " + std::to_string(t) + " needs a following frame");
  const ZBuffer zb = splat_frame(tracks, t);
  FlowField flow(tracks.rows, tracks.cols);
  for (int r = 0; r < tracks.rows; ++r)
    for (int c = 0; c < tracks.cols; ++c) {
      const PointRef& ref = zb.at(r, c);
      if (ref.layer < 0) continue;
      const Projection& a = tracks.at(ref.layer, t, ref.point);
      const Projection& b = tracks.at(ref.layer, t + 1, ref.point);
      if (!b.valid) continue;
      const std::size_t idx = flow.index(r, c);
      flow.dcol[idx] = b.col - a.col;
      flow.drow[idx] = b.row - a.row;
      flow.valid[idx] = 1;
    }
  return flow;
}

Tensor4f video_to_tensor(const std::vector<Image>& frames) {
  if (frames.empty()) return {};
  const Image& f0 = frames.front();
  Tensor4f t(static_cast<std::uint32_t>(frames.size()), f0.rows(), f0.cols(), 3);
  std::size_t k = 0;
  for (const auto& f : frames) {
    if (!f.same_shape(f0)) throw ShapeError("video frames differ in size");
    for (auto v : f.data()) t.data[k++] = static_cast<float>(v);
  }
  return t;
}

std::vector<Image> tensor_to_video(const Tensor4f& t) {
  if (t.channels() != 3) throw ShapeError("video tensor must have 3 channels");
  std::vector<Image> frames;
  std::size_t k = 0;
  for (std::uint32_t f = 0; f < t.frames(); ++f) {
    Image img = make_image(t.rows(), t.cols());
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(std::clamp(std::lround(t.data[k++]), 0L, 255L));
    frames.push_back(std::move(img));
  }
  return frames;
}

Tensor4f mask_to_tensor(const DisocclusionMask& mask) {
  Tensor4f t(mask.frames, mask.rows, mask.cols, 1);
  for (std::size_t i = 0; i < mask.data.size(); ++i) t.data[i] = mask.data[i] ? 1.0f : 0.0f;
  return t;
}

DisocclusionMask tensor_to_mask(const Tensor4f& t) {
  if (t.channels() != 1) throw ShapeError("mask tensor must have a trailing dimension of 1");
  DisocclusionMask mask(t.frames(), t.rows(), t.cols());
  for (std::size_t i = 0; i < t.data.size(); ++i) mask.data[i] = t.data[i] > 0.5f;
  return mask;
}

Tensor4f flows_to_tensor(const std::vector<FlowField>& flows) {
  if (flows.empty()) return Tensor4f(0, 0, 0, 2);
  Tensor4f t(static_cast<std::uint32_t>(flows.size()), flows[0].rows, flows[0].cols, 2);
  const float nan = std::numeric_limits<float>::quiet_NaN();
  for (std::size_t f = 0; f < flows.size(); ++f)
    for (int r = 0; r < flows[f].rows; ++r)
      for (int c = 0; c < flows[f].cols; ++c) {
        const std::size_t i = flows[f].index(r, c);
        const bool ok = flows[f].valid[i];
        t.at(f, r, c, 0) = ok ? static_cast<float>(flows[f].dcol[i]) : nan;
        t.at(f, r, c, 1) = ok ? static_cast<float>(flows[f].drow[i]) : nan;
      }
  return t;
}

std::vector<FlowField> tensor_to_flows(const Tensor4f& t) {
  if (t.channels() != 2) throw ShapeError("flow tensor must have a trailing dimension of 2");
  std::vector<FlowField> flows;
  for (std::uint32_t f = 0; f < t.frames(); ++f) {
    FlowField flow(t.rows(), t.cols());
    for (std::uint32_t r = 0; r < t.rows(); ++r)
      for (std::uint32_t c = 0; c < t.cols(); ++c) {
        const float u = t.at(f, r, c, 0), v = t.at(f, r, c, 1);
        if (std::isnan(u) || std::isnan(v)) continue;
        const std::size_t i = flow.index(r, c);
        flow.dcol[i] = u;
        flow.drow[i] = v;
        flow.valid[i] = 1;
      }
    flows.push_back(std::move(flow));
  }
  return flows;
}

namespace {

std::string numbered(const char* prefix, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.png", prefix, i);
  return buf;
}

}  // namespace

void write_tracking_video(const fs::path& dir, const std::vector<Image>& frames) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i) write_png(dir / numbered("track", i), frames[i]);
  write_tensor(dir / "tracking.pdgt", video_to_tensor(frames));
}

void write_disocclusion(const fs::path& dir, const DisocclusionMask& mask) {
  fs::create_directories(dir);
  for (int t = 0; t < mask.frames; ++t) write_mask_png(dir / numbered("mask", t), mask.frame(t));
  write_tensor(dir / "disocclusion.pdgt", mask_to_tensor(mask));
}

void write_flows(const fs::path& dir, const std::vector<FlowField>& flows) {
  fs::create_directories(dir);
  write_tensor(dir / "flow.pdgt", flows_to_tensor(flows));
}

}  // namespace pdg
