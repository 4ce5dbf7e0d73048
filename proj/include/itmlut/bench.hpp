#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "itmlut/bundle.hpp"
#include "itmlut/pipeline.hpp"

namespace itm {

struct Resolution {
  std::string name;
  int width;
  int height;
};

/// Accepts `HD`, `UHD` or `WxH`.
Resolution parse_resolution(const std::string& s);

struct BenchOptions {
  std::vector<Resolution> resolutions = {{"HD", 1920, 1080}, {"UHD", 3840, 2160}};
  int iterations = 5;
  int warmup = 3;
  unsigned threads = 1;
  /// Thread counts for the render-stage scaling curve, measured on the
  /// largest resolution. Empty skips the curve.
  std::vector<unsigned> scaling_threads = {1, 2, 4, 8};
  std::uint64_t seed = 7;
};

struct StageMedians {
  double means, vertices, predict, merge, render;
};

struct ResolutionResult {
  Resolution resolution;
  std::vector<double> wall_seconds;  // measured iterations, warmup excluded
  double median_seconds = 0.0;
  /// Relative gap between the medians of the first and second half of the
  /// measured iterations.
  double half_to_half_variation = 0.0;
  StageMedians stages{};
};

struct ScalingPoint {
  unsigned threads;
  double median_render_seconds;
};

struct BenchReport {
  std::vector<ResolutionResult> results;
  std::vector<ScalingPoint> scaling;
  long peak_rss_kib = 0;
  unsigned hardware_threads = 0;
};

/// Synthetic SDR test frame: smooth gradients plus seeded noise.
Frame synthetic_sdr_frame(int width, int height, std::uint64_t seed);

BenchReport run_bench(const Bundle& bundle, const BenchOptions& options);
std::string to_json(const BenchReport& report);

}  // namespace itm
