#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>

#include "pdgstudio/motion.hpp"
#include "pdgstudio/raster.hpp"
#include "pdgstudio/tensor.hpp"

namespace pdg {

inline constexpr int kLatentChannels = 16;
inline constexpr int kSpatialStride = 8;
inline constexpr int kTemporalGroup = 4;
inline constexpr int kDefaultSteps = 50;    // N
inline constexpr int kDefaultReplace = 35;  // M

enum class Provenance { Source, Edit, Composite };
std::string_view to_string(Provenance p);

/// (1 + T/4) x H/8 x W/8 x 16 latent.
struct LatentTensor {
  Tensor4f values;
  Provenance provenance = Provenance::Source;
};

/// (1 + T/4) x H/8 x W/8 x 1 binary latent mask.
struct LatentMask {
  Tensor4f values;
};

/// Throws ArgumentError unless frames = 1 + 4k, rows and cols are multiples of 8.
void check_latent_divisible(std::uint32_t frames, std::uint32_t rows, std::uint32_t cols);
std::array<std::uint32_t, 4> latent_shape(std::uint32_t frames, std::uint32_t rows, std::uint32_t cols,
                                          std::uint32_t channels = kLatentChannels);

/// Input image at frame 0, zeros at frames 1..T.
Tensor4f build_pseudo_video(const Image& image, int frames);
/// The edited last frame replicated into all 1 + T frames. Throws ShapeError
/// when the frame is not rows x cols.
Tensor4f build_edit_video(const Image& edited, int frames, int rows, int cols);

/// Max pooling over 8x8 pixel blocks and temporal groups {0}, {1..4}, {5..8}, ...
LatentMask downsample_mask(const DisocclusionMask& mask);

/// mask * edit + (1 - mask) * source, broadcast over channels.
LatentTensor composite(const LatentTensor& source, const LatentTensor& edit, const LatentMask& mask);

/// Latent frame 0 untouched; later frames zeroed wherever the mask is 0.
LatentTensor apply_zero_rule(const LatentTensor& latent, const LatentMask& mask);

enum class Conditioning { UseSource, UseComposite };
std::string_view to_string(Conditioning c);

struct ScheduleDecision {
  int step = 1;
  int total_steps = kDefaultSteps;
  int replace_steps = kDefaultReplace;
  Conditioning outcome = Conditioning::UseSource;
};

/// Step n counts down from N to 1; the composite is used while n > N - M.
ScheduleDecision schedule_conditioning(int step, int total_steps, int replace_steps);

class VideoEncoder {
 public:
  virtual ~VideoEncoder() = default;
  virtual std::string id() const = 0;
  virtual LatentTensor encode(const Tensor4f& video) const = 0;
};

/// Deterministic linear stand-in for a video VAE: temporal grouping as in
/// downsample_mask (mean instead of max), 8x8 spatial mean, then a fixed
/// 16x3 channel lift applied to RGB / 255.
class ReferenceEncoder final : public VideoEncoder {
 public:
  std::string id() const override { return "reference-pool-lift-v1"; }
  LatentTensor encode(const Tensor4f& video) const override;

  /// Row-major 16x3 weights: std::mt19937 seeded with 20240607, each weight
  /// u / 2^32 * 2 - 1 for successive 32-bit draws u.
  static const std::array<std::array<double, 3>, kLatentChannels>& lift_matrix();
};

LatentTensor reference_encode(const Tensor4f& video);

}  // namespace pdg
