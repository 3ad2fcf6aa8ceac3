#include "pdgstudio/pipeline.hpp"

#include "pdgstudio/checksum.hpp"
#include "pdgstudio/document.hpp"
#include "pdgstudio/image_io.hpp"

namespace pdg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
  std::string text = "graph has " + std::to_string(diagnostics.size()) + " violation(s)";
  for (const auto& d : diagnostics) text += "\n  " + d.subject + ": " + std::string(to_string(d.violation)) + ": " + d.message;
  return text;
}

}  // namespace

InvalidGraphError::InvalidGraphError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorCategory::Validation, summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

void require_valid(const Pdg& pdg) {
  auto diagnostics = validate_pdg(pdg);
  if (!diagnostics.empty()) throw InvalidGraphError(std::move(diagnostics));
}

PointCloud static_scene_cloud(const Scene& scene, const Pdg& pdg) {
  Mask occupied = make_mask(scene.depth.rows(), scene.depth.cols());
  for (const auto& node : pdg.nodes) {
    if (!node.footprint.same_shape(occupied))
      throw SceneError(SceneErrorKind::DimensionMismatch, "footprint of node '" + node.id + "' does not match the scene");
    for (std::size_t i = 0; i < occupied.data().size(); ++i) occupied.data()[i] |= node.footprint.data()[i];
  }
  return lift_unoccupied(scene, occupied);
}

CompileResult compile_motion(const Scene& scene, const Pdg& pdg, const Pose& target, const CompileOptions& options) {
  require_valid(pdg);
  CompileResult result;
  result.target = clamp_pose(pdg, target);
  result.timeline = interpolate_timeline(pdg, result.target, options.frames, options.easing);
  const auto clouds = transform_clouds(pdg, result.timeline);
  result.tracking = render_tracking(pdg, clouds, static_scene_cloud(scene, pdg), scene.camera);
  result.mask = compute_disocclusion(result.tracking.tracks);
  result.flows.reserve(options.frames);
  for (int t = 0; t < options.frames; ++t) result.flows.push_back(ground_truth_flow(result.tracking.tracks, t));
  return result;
}

json write_compile_outputs(const fs::path& dir, const Scene& scene, const CompileResult& result,
                           const CompileOptions& options) {
  fs::create_directories(dir);
  write_png(dir / "input.png", scene.image);
  write_tracking_video(dir, result.tracking.frames);
  write_disocclusion(dir, result.mask);
  write_flows(dir, result.flows);

  json files = json::object();
  for (const auto& [key, name] : {std::pair{"input", "input.png"}, std::pair{"tracking", "tracking.pdgt"},
                                  std::pair{"disocclusion", "disocclusion.pdgt"}, std::pair{"flow", "flow.pdgt"}})
    files[key] = {{"path", name}, {"sha256", sha256_file(dir / name)}};
  json manifest = {{"format", "pdg-compile"},
                   {"version", 1},
                   {"T", options.frames},
                   {"frames", options.frames + 1},
                   {"rows", scene.image.rows()},
                   {"cols", scene.image.cols()},
                   {"easing", std::string(to_string(options.easing))},
                   {"target", to_json(result.target)},
                   {"files", files}};
  write_text_file(dir / kCompileManifest, manifest.dump(2) + "\n");
  return manifest;
}

CompiledArtifacts load_compile_outputs(const fs::path& dir) {
  const fs::path manifest_path = dir / kCompileManifest;
  if (!fs::is_regular_file(manifest_path)) throw IoError("missing compile manifest " + manifest_path.string());
  CompiledArtifacts out;
  try {
    out.manifest = json::parse(read_text_file(manifest_path));
    const auto& files = out.manifest.at("files");
    auto checked = [&](const char* key) {
      const fs::path p = dir / files.at(key).at("path").get<std::string>();
      if (!fs::is_regular_file(p)) throw IoError("missing compile artifact " + p.string());
      if (sha256_file(p) != files.at(key).at("sha256").get<std::string>())
        throw IoError("checksum mismatch for " + p.string());
      return p;
    };
    out.input = read_rgb_png(checked("input"));
    out.tracking = read_tensor(checked("tracking"));
    out.mask = tensor_to_mask(read_tensor(checked("disocclusion")));
    out.flows = tensor_to_flows(read_tensor(checked("flow")));
  } catch (const json::exception& e) {
    throw IoError("malformed compile manifest: " + std::string(e.what()));
  }
  return out;
}

}  // namespace pdg
