#pragma once

#include <array>
#include <optional>
#include <vector>

#include "itmlut/bundle.hpp"
#include "itmlut/contribution.hpp"
#include "itmlut/cube.hpp"
#include "itmlut/frame.hpp"
#include "itmlut/lut.hpp"
#include "itmlut/predictor.hpp"

namespace itm {

enum class ClampPolicy {
  Clamp,   // clamp out-of-range input samples and count them
  Strict,  // reject frames holding samples outside [0,1]
};

struct PipelineConfig {
  std::optional<VertexMode> vertex_mode;
  std::optional<ContributionParams> contribution;
  /// Worker count for the per-pixel stages; 0 picks hardware concurrency.
  unsigned threads = 1;
  ClampPolicy clamp = ClampPolicy::Clamp;

  /// Checks overrides against the bundle before any pixel work.
  void validate(const Bundle& bundle) const;
};

/// Wall-clock seconds spent in each stage of one apply() call.
struct StageTimings {
  double means = 0.0;
  double vertices = 0.0;
  double predict = 0.0;
  double merge = 0.0;
  double render = 0.0;

  double total() const { return means + vertices + predict + merge + render; }
};

/// Frame-level state computed once before the per-pixel stages.
struct FrameAnalysis {
  ChannelMeans means;
  std::array<BranchWeights, 3> weights{};
  std::vector<Lut3D> luts;  // bright, middle, dark
};

ChannelMeans channel_means(const Frame& x);

/// Vertex grid for one branch under the effective vertex mode.
VertexGrid branch_vertices(const Bundle& bundle, VertexMode mode, BranchId branch, const ChannelMeans& means);

/// Means, vertices, weight prediction and LUT merging.
FrameAnalysis analyze(const Frame& x, const Bundle& bundle, const PipelineConfig& cfg,
                      StageTimings* timings = nullptr);

/// Three lookups per pixel and contribution-weighted fusion, tile-parallel
/// over 64-row bands. Output is tagged HdrPq2020.
Frame render(const Frame& x, const std::vector<Lut3D>& luts, const ContributionParams& contribution,
             unsigned threads);

/// Full SDR -> HDR conversion.
Frame apply(const Frame& x, const Bundle& bundle, const PipelineConfig& cfg, StageTimings* timings = nullptr);

/// Merged LUTs of each branch for the given statistics, resampled onto a
/// uniform lattice of size `size`.
std::array<CubeFile, 3> dump_luts(const Bundle& bundle, VertexMode mode, const ChannelMeans& means,
                                  const std::array<BranchWeights, 3>& weights, std::size_t size);

}  // namespace itm
