#include "pdgstudio/service.hpp"

#include <charconv>

#include "pdgstudio/checksum.hpp"
#include "pdgstudio/image_io.hpp"
#include "pdgstudio/pipeline.hpp"

namespace pdg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kPreviewCacheLimit = 512;

ApiResponse error_response(int status, const std::string& message) { return {status, {{"error", message}}}; }

ApiResponse unknown_session(const std::string& id) { return error_response(404, "unknown session '" + id + "'"); }

ApiResponse busy(const std::string& id) {
  return error_response(409, "session '" + id + "' is being modified by another request");
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw DocumentError(std::string("request body is not JSON: ") + e.what());
  }
}

// Every handler funnels through here so library errors map to one status table.
template <typename F>
ApiResponse guarded(F&& handler) {
  try {
    return handler();
  } catch (const InvalidGraphError& e) {
    return {400, {{"error", "invalid graph"}, {"diagnostics", diagnostics_to_json(e.diagnostics())}}};
  } catch (const Error& e) {
    return error_response(400, e.what());
  } catch (const json::exception& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

std::string session_path(const std::string& id) { return "/session/" + id; }

}  // namespace

PreviewFrame render_preview(const Scene& scene, const Pdg& pdg, const Pose& pose, int frames, Easing easing, int frame) {
  require_valid(pdg);
  if (frame < 0 || frame > frames)
    throw ArgumentError("preview frame " + std::to_string(frame) + " outside [0, " + std::to_string(frames) + "]");
  const MotionTimeline full = interpolate_timeline(pdg, clamp_pose(pdg, pose), frames, easing);
  MotionTimeline pair{{full.poses[0]}, easing};
  if (frame > 0) pair.poses.push_back(full.poses[static_cast<std::size_t>(frame)]);
  const auto clouds = transform_clouds(pdg, pair);
  const TrackingVideo video = render_tracking(pdg, clouds, static_scene_cloud(scene, pdg), scene.camera);
  const DisocclusionMask mask = compute_disocclusion(video.tracks);
  const int last = frame > 0 ? 1 : 0;
  return {encode_png(video.frames[static_cast<std::size_t>(last)]), encode_mask_png(mask.frame(last))};
}

std::string preview_key(const SessionSnapshot& snapshot, int frame) {
  const std::string canonical = to_json(snapshot.pose).dump() + "|" + std::to_string(snapshot.frames) + "|" +
                                std::string(to_string(snapshot.easing));
  const std::vector<std::uint8_t> bytes(canonical.begin(), canonical.end());
  return sha256_hex(bytes) + "#" + std::to_string(frame);
}

Session::Session(std::string id, SessionSnapshot initial)
    : id_(std::move(id)), state_(std::make_shared<const SessionSnapshot>(std::move(initial))) {}

std::shared_ptr<const SessionSnapshot> Session::snapshot() const {
  std::shared_lock lock(state_mutex_);
  return state_;
}

void Session::publish(std::shared_ptr<const SessionSnapshot> next) {
  {
    std::unique_lock lock(state_mutex_);
    state_ = std::move(next);
  }
  std::lock_guard cache_lock(cache_mutex_);
  cache_.clear();
}

std::optional<PreviewFrame> Session::cached_preview(const std::string& key) const {
  std::lock_guard lock(cache_mutex_);
  auto it = cache_.find(key);
  if (it == cache_.end()) return std::nullopt;
  return it->second;
}

void Session::store_preview(const std::string& key, PreviewFrame preview) {
  std::lock_guard lock(cache_mutex_);
  if (cache_.size() >= kPreviewCacheLimit) cache_.clear();
  cache_.insert_or_assign(key, std::move(preview));
}

StudioService::StudioService(fs::path workdir) : workdir_(std::move(workdir)) {}

ApiResponse StudioService::health() const { return {200, {{"status", "ok"}}}; }

std::shared_ptr<Session> StudioService::find(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::unique_lock<std::mutex> StudioService::hold_writer(const std::string& id) {
  auto session = find(id);
  if (!session) throw LookupError("unknown session '" + id + "'");
  return session->try_begin_write();
}

std::size_t StudioService::preview_renders() const noexcept { return preview_renders_.load(); }

ApiResponse StudioService::create_session(const std::string& body) {
  return guarded([&]() -> ApiResponse {
    const json request = parse_body(body);
    if (!request.is_object() || !request.contains("manifest") || !request["manifest"].is_string())
      throw DocumentError("expected {\"manifest\": \"<scene manifest path>\"}");
    const fs::path manifest = request["manifest"].get<std::string>();
    SessionSnapshot state;
    state.scene = std::make_shared<const Scene>(load_scene(manifest));
    state.scene_dir = manifest.parent_path();
    std::string id;
    {
      std::unique_lock lock(sessions_mutex_);
      char buf[32];
      std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_++));
      id = buf;
      sessions_.emplace(id, std::make_shared<Session>(id, std::move(state)));
    }
    return {201, {{"session", id}}};
  });
}

ApiResponse StudioService::get_scene(const std::string& id) const {
  auto session = find(id);
  if (!session) return unknown_session(id);
  return guarded([&]() -> ApiResponse {
    const auto state = session->snapshot();
    const Scene& scene = *state->scene;
    json masks = json::object();
    for (const auto& [part, mask] : scene.part_masks) masks[part] = base64_encode(encode_mask_png(mask));
    return {200,
            {{"session", id},
             {"rows", scene.image.rows()},
             {"cols", scene.image.cols()},
             {"camera", camera_to_json(scene.camera)},
             {"image", base64_encode(encode_png(scene.image))},
             {"masks", masks}}};
  });
}

ApiResponse StudioService::put_pdg(const std::string& id, const std::string& body) {
  auto session = find(id);
  if (!session) return unknown_session(id);
  auto gate = session->try_begin_write();
  if (!gate.owns_lock()) return busy(id);
  return guarded([&]() -> ApiResponse {
    const auto current = session->snapshot();
    PdgDocument doc = parse_pdg_document(parse_body(body));
    Pdg pdg = assemble_pdg(doc, current->scene_dir, current->scene.get());
    const auto diagnostics = validate_pdg(pdg);
    if (!diagnostics.empty()) return {400, {{"diagnostics", diagnostics_to_json(diagnostics)}}};
    auto next = std::make_shared<SessionSnapshot>(*current);
    next->document = std::move(doc);
    next->pdg = std::make_shared<const Pdg>(std::move(pdg));
    next->pose = Pose{};
    session->publish(std::move(next));
    return {200, {{"diagnostics", json::array()}}};
  });
}

ApiResponse StudioService::put_pose(const std::string& id, const std::string& body) {
  auto session = find(id);
  if (!session) return unknown_session(id);
  auto gate = session->try_begin_write();
  if (!gate.owns_lock()) return busy(id);
  return guarded([&]() -> ApiResponse {
    const auto current = session->snapshot();
    if (!current->pdg) throw ArgumentError("no graph loaded; PUT /session/" + id + "/pdg first");
    json request = parse_body(body);
    auto next = std::make_shared<SessionSnapshot>(*current);
    if (request.is_object() && request.contains("pose")) {
      if (request.contains("frames")) next->frames = request["frames"].get<int>();
      if (request.contains("easing")) next->easing = easing_from_string(request["easing"].get<std::string>());
      for (const auto& [key, value] : request.items())
        if (key != "pose" && key != "frames" && key != "easing") throw DocumentError("unknown field '" + key + "'");
      request = request["pose"];
    }
    if (next->frames < 1) throw ArgumentError("frames must be at least 1");
    next->pose = clamp_pose(*current->pdg, parse_pose_document(request));
    json previews = json::array();
    for (int f = 0; f <= next->frames; ++f) previews.push_back(session_path(id) + "/preview/" + std::to_string(f));
    json response = {{"pose", to_json(next->pose)},
                     {"frames", next->frames},
                     {"easing", std::string(to_string(next->easing))},
                     {"previews", previews}};
    session->publish(std::move(next));
    return {200, response};
  });
}

ApiResponse StudioService::get_preview(const std::string& id, const std::string& frame_text) {
  auto session = find(id);
  if (!session) return unknown_session(id);
  return guarded([&]() -> ApiResponse {
    int frame = -1;
    const auto [ptr, ec] = std::from_chars(frame_text.data(), frame_text.data() + frame_text.size(), frame);
    if (ec != std::errc{} || ptr != frame_text.data() + frame_text.size())
      throw ArgumentError("frame must be an integer, got '" + frame_text + "'");
    const auto state = session->snapshot();
    if (!state->pdg) throw ArgumentError("no graph loaded; PUT /session/" + id + "/pdg first");
    const std::string key = preview_key(*state, frame);
    std::optional<PreviewFrame> preview = session->cached_preview(key);
    const bool cached = preview.has_value();
    if (!preview) {
      preview = render_preview(*state->scene, *state->pdg, state->pose, state->frames, state->easing, frame);
      ++preview_renders_;
      session->store_preview(key, *preview);
    }
    return {200,
            {{"frame", frame},
             {"pose", to_json(state->pose)},
             {"cached", cached},
             {"tracking", base64_encode(preview->tracking_png)},
             {"mask", base64_encode(preview->mask_png)}}};
  });
}

ApiResponse StudioService::compile(const std::string& id, const std::string& body) {
  auto session = find(id);
  if (!session) return unknown_session(id);
  return guarded([&]() -> ApiResponse {
    const auto state = session->snapshot();
    if (!state->pdg) throw ArgumentError("no graph loaded; PUT /session/" + id + "/pdg first");
    fs::path out;
    if (!body.empty()) {
      const json request = parse_body(body);
      if (request.contains("out")) out = request["out"].get<std::string>();
    }
    if (out.empty()) {
      std::unique_lock lock(sessions_mutex_);
      out = workdir_ / id / ("compile-" + std::to_string(next_compile_++));
    }
    const CompileOptions options{state->frames, state->easing};
    const CompileResult result = compile_motion(*state->scene, *state->pdg, state->pose, options);
    json manifest = write_compile_outputs(out, *state->scene, result, options);
    return {200, {{"dir", out.string()}, {"manifest", manifest}}};
  });
}

}  // namespace pdg
