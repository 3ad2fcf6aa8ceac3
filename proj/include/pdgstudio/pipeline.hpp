#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "pdgstudio/graph.hpp"
#include "pdgstudio/motion.hpp"
#include "pdgstudio/scene.hpp"

namespace pdg {

/// Raised when a graph fails validate_pdg(); carries every diagnostic.
class InvalidGraphError : public Error {
 public:
  explicit InvalidGraphError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Throws InvalidGraphError unless validate_pdg() is empty.
void require_valid(const Pdg& pdg);

/// Scene pixels outside every node footprint, lifted to 3D.
PointCloud static_scene_cloud(const Scene& scene, const Pdg& pdg);

struct CompileOptions {
  int frames = kDefaultFrames;  // T
  Easing easing = Easing::Linear;
};

struct CompileResult {
  Pose target;  // clamped
  MotionTimeline timeline;
  TrackingVideo tracking;
  DisocclusionMask mask;
  std::vector<FlowField> flows;  // T entries, frame t -> t + 1
};

CompileResult compile_motion(const Scene& scene, const Pdg& pdg, const Pose& target, const CompileOptions& options);

inline constexpr const char* kCompileManifest = "compile.json";

/// Writes input.png, tracking frames and tensor, mask frames and tensor, flow.pdgt
/// and compile.json. Returns the manifest.
nlohmann::json write_compile_outputs(const std::filesystem::path& dir, const Scene& scene, const CompileResult& result,
                                     const CompileOptions& options);

struct CompiledArtifacts {
  nlohmann::json manifest;
  Image input;
  Tensor4f tracking;
  DisocclusionMask mask;
  std::vector<FlowField> flows;
};

/// Reads a compile directory back, verifying checksums.
CompiledArtifacts load_compile_outputs(const std::filesystem::path& dir);

}  // namespace pdg
