#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "itmlut/frame.hpp"
#include "itmlut/lut.hpp"

namespace itm {

/// Fixed weight-predictor architecture: five 3x3 stride-2 convolutions with
/// LeakyReLU(0.1), global average pooling, then a 128->5 linear layer.
namespace arch {
inline constexpr int kInputSize = 256;
inline constexpr std::size_t kConvLayers = 5;
inline constexpr std::array<std::size_t, kConvLayers + 1> kChannels = {3, 16, 32, 64, 128, 128};
inline constexpr std::size_t kKernel = 3;
inline constexpr std::size_t kFcIn = 128;
inline constexpr std::size_t kFcOut = kBasisPerBranch;
inline constexpr double kLeakySlope = 0.1;

/// Total scalar count of one branch network.
constexpr std::size_t parameter_count() {
  std::size_t total = 0;
  for (std::size_t l = 0; l < kConvLayers; ++l)
    total += kChannels[l + 1] * kChannels[l] * kKernel * kKernel + kChannels[l + 1];
  return total + kFcOut * kFcIn + kFcOut;
}
}  // namespace arch

struct ConvLayer {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::vector<float> weight;  // (out, in, ky, kx)
  std::vector<float> bias;    // (out)

  bool operator==(const ConvLayer&) const = default;
};

struct DenseLayer {
  std::size_t out_features = 0;
  std::size_t in_features = 0;
  std::vector<float> weight;  // (out, in)
  std::vector<float> bias;

  bool operator==(const DenseLayer&) const = default;
};

/// One branch's network parameters.
struct PredictorWeights {
  std::array<ConvLayer, arch::kConvLayers> conv;
  DenseLayer fc;

  /// All-zero network of the fixed architecture.
  static PredictorWeights zeros();
  /// Zero network whose output is the constant `bias`.
  static PredictorWeights constant(const std::array<float, arch::kFcOut>& bias);
  /// Uniform parameters in [-scale/sqrt(fan_in), +scale/sqrt(fan_in)].
  static PredictorWeights random(std::uint64_t seed, double scale = 1.0);

  std::size_t parameter_count() const;
  /// Throws BundleCorruption when any tensor disagrees with the architecture.
  void validate() const;

  bool operator==(const PredictorWeights&) const = default;
};

using BranchWeights = std::array<double, kBasisPerBranch>;

/// Bilinear resample (half-pixel centres) to exactly 256x256.
Frame downsample(const Frame& x);

/// Forward pass on a 256x256 frame. Accumulates in double, rounds the
/// outputs to single precision.
BranchWeights predict_weights(const Frame& x_small, const PredictorWeights& params);

}  // namespace itm
