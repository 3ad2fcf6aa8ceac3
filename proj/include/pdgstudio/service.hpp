#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdgstudio/document.hpp"
#include "pdgstudio/motion.hpp"
#include "pdgstudio/scene.hpp"

namespace pdg {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Immutable view of a session; writers publish a new one.
struct SessionSnapshot {
  std::shared_ptr<const Scene> scene;
  std::filesystem::path scene_dir;
  std::optional<PdgDocument> document;
  std::shared_ptr<const Pdg> pdg;  // set once a document validated
  Pose pose;
  int frames = kDefaultFrames;
  Easing easing = Easing::Linear;
};

struct PreviewFrame {
  std::vector<std::uint8_t> tracking_png;
  std::vector<std::uint8_t> mask_png;
};

/// Tracking and mask images for one frame. Only frames 0 and `frame` of the
/// timeline are evaluated, which gives the same pixels as a full compile.
PreviewFrame render_preview(const Scene& scene, const Pdg& pdg, const Pose& pose, int frames, Easing easing, int frame);

class Session {
 public:
  Session(std::string id, SessionSnapshot initial);

  const std::string& id() const noexcept { return id_; }
  std::shared_ptr<const SessionSnapshot> snapshot() const;
  void publish(std::shared_ptr<const SessionSnapshot> next);

  /// Single-writer gate; an empty lock means another mutation is in flight.
  std::unique_lock<std::mutex> try_begin_write() { return std::unique_lock<std::mutex>(writer_, std::try_to_lock); }

  std::optional<PreviewFrame> cached_preview(const std::string& key) const;
  void store_preview(const std::string& key, PreviewFrame preview);

 private:
  std::string id_;
  std::mutex writer_;
  mutable std::shared_mutex state_mutex_;
  std::shared_ptr<const SessionSnapshot> state_;
  mutable std::mutex cache_mutex_;
  std::map<std::string, PreviewFrame> cache_;
};

/// Transport-independent implementation of the studio HTTP API.
class StudioService {
 public:
  /// Compile outputs without an explicit "out" go below `workdir`.
  explicit StudioService(std::filesystem::path workdir);

  ApiResponse health() const;
  ApiResponse create_session(const std::string& body);
  ApiResponse get_scene(const std::string& id) const;
  ApiResponse put_pdg(const std::string& id, const std::string& body);
  ApiResponse put_pose(const std::string& id, const std::string& body);
  ApiResponse get_preview(const std::string& id, const std::string& frame);
  ApiResponse compile(const std::string& id, const std::string& body);

  std::shared_ptr<Session> find(const std::string& id) const;

  /// Holds the writer gate of a session so tests can provoke a conflict.
  std::unique_lock<std::mutex> hold_writer(const std::string& id);

  std::size_t preview_renders() const noexcept;

 private:
  std::filesystem::path workdir_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
  std::uint64_t next_compile_ = 1;
  std::atomic<std::size_t> preview_renders_{0};
};

/// Cache key for a preview of `frame` under the snapshot's pose and timing.
std::string preview_key(const SessionSnapshot& snapshot, int frame);

/// HTTP transport for StudioService.
class HttpServer {
 public:
  explicit HttpServer(StudioService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called from another thread.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pdg
