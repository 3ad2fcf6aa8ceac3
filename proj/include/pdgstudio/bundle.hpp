#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pdgstudio/latent.hpp"

namespace pdg {

struct Prompts {
  std::string source;  // prompt of the motion pass
  std::string added;   // describes what the user painted into the disoccluded region
  std::string combined() const { return source + " " + added; }
};

struct BundleRequest {
  Image input;
  Tensor4f tracking;  // (1 + T) x H x W x 3
  DisocclusionMask mask;
  Image edited;
  Prompts prompts;
  int steps = kDefaultSteps;
  int replace = kDefaultReplace;
  bool timestamp = false;  // adds the only non-deterministic manifest field, created_at
};

/// Loaded or freshly written conditioning bundle.
struct ConditioningBundle {
  nlohmann::json manifest;
  Image input;
  Image edited;
  Tensor4f tracking;
  Tensor4f disocclusion;
  Tensor4f latent_mask;
  Tensor4f source_latent;
  Tensor4f edit_latent;
  Tensor4f composite_latent;  // zero rule already applied
  Prompts prompts;
  int steps = kDefaultSteps;
  int replace = kDefaultReplace;
  std::string encoder_id;
};

inline constexpr const char* kBundleManifest = "bundle.json";

/// Encodes, composites and writes every artifact plus bundle.json with SHA-256 checksums.
ConditioningBundle export_bundle(const BundleRequest& request, const VideoEncoder& encoder,
                                 const std::filesystem::path& out_dir);

/// Reads a bundle back; a checksum mismatch or missing file raises BundleError.
ConditioningBundle load_bundle(const std::filesystem::path& dir);

}  // namespace pdg
