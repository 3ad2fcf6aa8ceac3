#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdgstudio/flow_field.hpp"
#include "pdgstudio/raster.hpp"

namespace pdg {

struct BlockMatchParams {
  int levels = 3;
  int window = 16;
  int cell = 4;             // flow is estimated once per cell x cell block of pixels
  int coarse_radius = 4;    // search radius at the coarsest level
  int refine_radius = 2;    // search radius around the upsampled prediction
};

/// Coarse-to-fine SAD block matching on luma. Ties go to the smallest
/// displacement. Throws ArgumentError when a frame is smaller than one window.
FlowField estimate_flow(const Image& a, const Image& b, const BlockMatchParams& params = {});

inline constexpr double kDefaultTau = 0.5;

struct OptflowResult {
  double score = 0.0;
  std::size_t pairs_used = 0;
  std::size_t pixels_used = 0;
};

/// Mean over frame pairs of the mean cosine similarity between estimated flow
/// and reference flow, over pixels whose reference magnitude is at least `tau`.
/// Throws MetricError when no pixel of any pair qualifies.
OptflowResult optflow_score(const std::vector<Image>& video, const std::vector<FlowField>& reference, double tau = kDefaultTau,
                            const BlockMatchParams& params = {});

/// Mean per-pixel Euclidean RGB distance.
double idiff(const Image& a, const Image& b);

struct MaskedValue {
  double value = 0.0;
  bool empty_mask = false;
};

/// idiff restricted to set mask pixels; 0 with `empty_mask` when nothing is set.
MaskedValue idiff_masked(const Image& a, const Image& b, const Mask& mask);

/// Value reported for identical inputs.
inline constexpr double kPsnrCap = 100.0;
double psnr(const Image& a, const Image& b);
/// Mean SSIM over all 8x8 windows (stride 1) and channels.
double ssim(const Image& a, const Image& b);

struct MetricReport {
  std::string sample_id;
  int frames = 0;
  int rows = 0;
  int cols = 0;
  double tau = kDefaultTau;
  double optflow = 0.0;
  double idiff = 0.0;
  double idiff_m = 0.0;
  bool empty_mask = false;
  double psnr = 0.0;
  double ssim = 0.0;
};

nlohmann::json to_json(const MetricReport& report);
/// One row per sample plus a trailing "mean" row.
std::string metrics_csv(const std::vector<MetricReport>& reports);

}  // namespace pdg
