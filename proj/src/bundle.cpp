#include "pdgstudio/bundle.hpp"

#include <chrono>
#include <ctime>

#include "pdgstudio/checksum.hpp"
#include "pdgstudio/image_io.hpp"

namespace pdg {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Artifact {
  const char* key;
  const char* file;
};

constexpr Artifact kArtifacts[] = {
    {"input_image", "input.png"},
    {"edited_last_frame", "edited_last_frame.png"},
    {"tracking", "tracking.pdgt"},
    {"disocclusion", "disocclusion.pdgt"},
    {"latent_mask", "latent_mask.pdgt"},
    {"source_latent", "source_latent.pdgt"},
    {"edit_latent", "edit_latent.pdgt"},
    {"composite_latent", "composite_latent.pdgt"},
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ConditioningBundle export_bundle(const BundleRequest& req, const VideoEncoder& encoder, const fs::path& out_dir) {
  const auto& dims = req.tracking.dims;
  if (dims[3] != 3) throw ShapeError("tracking video must be RGB");
  if (req.mask.frames != static_cast<int>(dims[0]) || req.mask.rows != static_cast<int>(dims[1]) ||
      req.mask.cols != static_cast<int>(dims[2]))
    throw ShapeError("disocclusion mask and tracking video differ in shape");
  if (req.input.rows() != static_cast<int>(dims[1]) || req.input.cols() != static_cast<int>(dims[2]))
    throw ShapeError("input image and tracking video differ in size");
  const int frames = static_cast<int>(dims[0]) - 1;
  // Validates N and M before anything is written.
  schedule_conditioning(1, req.steps, req.replace);

  ConditioningBundle b;
  b.input = req.input;
  b.edited = req.edited;
  b.tracking = req.tracking;
  b.disocclusion = mask_to_tensor(req.mask);
  const LatentMask mask = downsample_mask(req.mask);
  const LatentTensor source = encoder.encode(build_pseudo_video(req.input, frames));
  LatentTensor edit = encoder.encode(build_edit_video(req.edited, frames, req.input.rows(), req.input.cols()));
  edit.provenance = Provenance::Edit;
  b.latent_mask = mask.values;
  b.source_latent = source.values;
  b.edit_latent = edit.values;
  b.composite_latent = apply_zero_rule(composite(source, edit, mask), mask).values;
  b.prompts = req.prompts;
  b.steps = req.steps;
  b.replace = req.replace;
  b.encoder_id = encoder.id();

  fs::create_directories(out_dir);
  write_png(out_dir / "input.png", b.input);
  write_png(out_dir / "edited_last_frame.png", b.edited);
  write_tensor(out_dir / "tracking.pdgt", b.tracking);
  write_tensor(out_dir / "disocclusion.pdgt", b.disocclusion);
  write_tensor(out_dir / "latent_mask.pdgt", b.latent_mask);
  write_tensor(out_dir / "source_latent.pdgt", b.source_latent);
  write_tensor(out_dir / "edit_latent.pdgt", b.edit_latent);
  write_tensor(out_dir / "composite_latent.pdgt", b.composite_latent);

  json files = json::object();
  for (const auto& a : kArtifacts) files[a.key] = {{"path", a.file}, {"sha256", sha256_file(out_dir / a.file)}};
  json schedule = json::array();
  for (int n = 1; n <= req.steps; ++n)
    schedule.push_back(std::string(to_string(schedule_conditioning(n, req.steps, req.replace).outcome)));
  const auto& ls = b.source_latent.dims;
  json manifest = {{"format", "pdg-conditioning-bundle"},
                   {"version", 1},
                   {"frames", dims[0]},
                   {"rows", dims[1]},
                   {"cols", dims[2]},
                   {"latent_shape", {ls[0], ls[1], ls[2], ls[3]}},
                   {"prompts", {{"source", b.prompts.source}, {"new", b.prompts.added}, {"combined", b.prompts.combined()}}},
                   {"steps", b.steps},
                   {"replace", b.replace},
                   {"encoder", b.encoder_id},
                   {"schedule", schedule},
                   {"files", files}};
  if (req.timestamp) manifest["created_at"] = utc_now();
  write_text_file(out_dir / kBundleManifest, manifest.dump(2) + "\n");
  b.manifest = std::move(manifest);
  return b;
}

ConditioningBundle load_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / kBundleManifest;
  if (!fs::is_regular_file(manifest_path)) throw BundleError("missing " + manifest_path.string());
  ConditioningBundle b;
  try {
    b.manifest = json::parse(read_text_file(manifest_path));
    const auto& files = b.manifest.at("files");
    for (const auto& a : kArtifacts) {
      const auto& entry = files.at(a.key);
      const fs::path path = dir / entry.at("path").get<std::string>();
      if (!fs::is_regular_file(path)) throw BundleError("bundle artifact '" + path.string() + "' is missing");
      if (sha256_file(path) != entry.at("sha256").get<std::string>())
        throw BundleError("checksum mismatch for '" + path.string() + "'");
    }
    auto path_of = [&](const char* key) { return dir / files.at(key).at("path").get<std::string>(); };
    b.input = read_rgb_png(path_of("input_image"));
    b.edited = read_rgb_png(path_of("edited_last_frame"));
    b.tracking = read_tensor(path_of("tracking"));
    b.disocclusion = read_tensor(path_of("disocclusion"));
    b.latent_mask = read_tensor(path_of("latent_mask"));
    b.source_latent = read_tensor(path_of("source_latent"));
    b.edit_latent = read_tensor(path_of("edit_latent"));
    b.composite_latent = read_tensor(path_of("composite_latent"));
    const auto& prompts = b.manifest.at("prompts");
    b.prompts = {prompts.at("source").get<std::string>(), prompts.at("new").get<std::string>()};
    b.steps = b.manifest.at("steps").get<int>();
    b.replace = b.manifest.at("replace").get<int>();
    b.encoder_id = b.manifest.at("encoder").get<std::string>();
  } catch (const json::exception& e) {
    throw BundleError("malformed bundle manifest: " + std::string(e.what()));
  }
  return b;
}

}  // namespace pdg
