#include "itmlut/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "itmlut/error.hpp"

namespace itm {

namespace {

ConvLayer make_conv(std::size_t l) {
  ConvLayer c;
  c.in_channels = arch::kChannels[l];
  c.out_channels = arch::kChannels[l + 1];
  c.weight.assign(c.out_channels * c.in_channels * arch::kKernel * arch::kKernel, 0.0f);
  c.bias.assign(c.out_channels, 0.0f);
  return c;
}

}  // namespace

PredictorWeights PredictorWeights::zeros() {
  PredictorWeights p;
  for (std::size_t l = 0; l < arch::kConvLayers; ++l) p.conv[l] = make_conv(l);
  p.fc.in_features = arch::kFcIn;
  p.fc.out_features = arch::kFcOut;
  p.fc.weight.assign(arch::kFcIn * arch::kFcOut, 0.0f);
  p.fc.bias.assign(arch::kFcOut, 0.0f);
  return p;
}

PredictorWeights PredictorWeights::constant(const std::array<float, arch::kFcOut>& bias) {
  PredictorWeights p = zeros();
  std::copy(bias.begin(), bias.end(), p.fc.bias.begin());
  return p;
}

PredictorWeights PredictorWeights::random(std::uint64_t seed, double scale) {
  PredictorWeights p = zeros();
  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<float>& v, std::size_t fan_in) {
    const double bound = scale / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (float& x : v) x = static_cast<float>(dist(rng));
  };
  for (auto& c : p.conv) {
    const std::size_t fan_in = c.in_channels * arch::kKernel * arch::kKernel;
    fill(c.weight, fan_in);
    fill(c.bias, fan_in);
  }
  fill(p.fc.weight, p.fc.in_features);
  fill(p.fc.bias, p.fc.in_features);
  return p;
}

std::size_t PredictorWeights::parameter_count() const {
  std::size_t total = fc.weight.size() + fc.bias.size();
  for (const auto& c : conv) total += c.weight.size() + c.bias.size();
  return total;
}

void PredictorWeights::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::BundleCorruption, "predictor " + what + " does not match the architecture");
  };
  for (std::size_t l = 0; l < arch::kConvLayers; ++l) {
    const ConvLayer& c = conv[l];
    const std::string name = "conv" + std::to_string(l);
    if (c.in_channels != arch::kChannels[l] || c.out_channels != arch::kChannels[l + 1]) fail(name + " channels");
    if (c.weight.size() != c.out_channels * c.in_channels * arch::kKernel * arch::kKernel) fail(name + " weight");
    if (c.bias.size() != c.out_channels) fail(name + " bias");
  }
  if (fc.in_features != arch::kFcIn || fc.out_features != arch::kFcOut) fail("fc dimensions");
  if (fc.weight.size() != arch::kFcIn * arch::kFcOut) fail("fc weight");
  if (fc.bias.size() != arch::kFcOut) fail("fc bias");
  if (parameter_count() != arch::parameter_count()) fail("parameter count");
}

Frame downsample(const Frame& x) {
  if (x.width < 8 || x.height < 8)
    throw Error(ErrorCode::InvalidArgument, "downsample needs a frame of at least 8x8");
  constexpr int kOut = arch::kInputSize;

  struct Tap {
    int i0, i1;
    double f;
  };
  auto taps = [](int src) {
    std::vector<Tap> t(kOut);
    const double ratio = static_cast<double>(src) / kOut;
    for (int o = 0; o < kOut; ++o) {
      double s = (o + 0.5) * ratio - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(src - 1));
      const int i0 = static_cast<int>(std::floor(s));
      const int i1 = std::min(i0 + 1, src - 1);
      t[o] = {i0, i1, s - i0};
    }
    return t;
  };
  const auto tx = taps(x.width);
  const auto ty = taps(x.height);

  Frame out(kOut, kOut, x.convention);
  for (int c = 0; c < 3; ++c)
    for (int oy = 0; oy < kOut; ++oy) {
      const Tap& vy = ty[oy];
      for (int ox = 0; ox < kOut; ++ox) {
        const Tap& vx = tx[ox];
        const double top = x.at(c, vx.i0, vy.i0) + vx.f * (x.at(c, vx.i1, vy.i0) - x.at(c, vx.i0, vy.i0));
        const double bot = x.at(c, vx.i0, vy.i1) + vx.f * (x.at(c, vx.i1, vy.i1) - x.at(c, vx.i0, vy.i1));
        out.at(c, ox, oy) = static_cast<float>(top + vy.f * (bot - top));
      }
    }
  return out;
}

namespace {

struct Activation {
  std::size_t channels;
  std::size_t height;
  std::size_t width;
  std::vector<double> data;  // (y, x, c)
};

Activation conv_stride2(const Activation& in, const ConvLayer& layer) {
  const std::size_t h = in.height, w = in.width;
  const std::size_t ho = (h + 1) / 2, wo = (w + 1) / 2;
  const std::size_t ci = layer.in_channels, co = layer.out_channels;
  constexpr std::size_t k = arch::kKernel;

  // Weights as (ky, kx, in, out) so the innermost loop runs over contiguous outputs.
  std::vector<double> wt(k * k * ci * co);
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t i = 0; i < ci; ++i)
      for (std::size_t t = 0; t < k * k; ++t) wt[(t * ci + i) * co + o] = layer.weight[(o * ci + i) * k * k + t];

  Activation out{co, ho, wo, std::vector<double>(ho * wo * co)};
  for (std::size_t oy = 0; oy < ho; ++oy)
    for (std::size_t ox = 0; ox < wo; ++ox) {
      double* acc = out.data.data() + (oy * wo + ox) * co;
      for (std::size_t o = 0; o < co; ++o) acc[o] = layer.bias[o];
      for (std::size_t ky = 0; ky < k; ++ky) {
        const std::size_t iy = 2 * oy + ky;  // shifted by the padding
        if (iy == 0 || iy > h) continue;
        for (std::size_t kx = 0; kx < k; ++kx) {
          const std::size_t ix = 2 * ox + kx;
          if (ix == 0 || ix > w) continue;
          const double* src = in.data.data() + ((iy - 1) * w + (ix - 1)) * ci;
          const double* wk = wt.data() + (ky * k + kx) * ci * co;
          for (std::size_t i = 0; i < ci; ++i) {
            const double v = src[i];
            const double* wrow = wk + i * co;
            for (std::size_t o = 0; o < co; ++o) acc[o] += v * wrow[o];
          }
        }
      }
      for (std::size_t o = 0; o < co; ++o)
        if (acc[o] < 0.0) acc[o] *= arch::kLeakySlope;
    }
  return out;
}

}  // namespace

BranchWeights predict_weights(const Frame& x_small, const PredictorWeights& params) {
  if (x_small.width != arch::kInputSize || x_small.height != arch::kInputSize)
    throw Error(ErrorCode::InvalidArgument, "predictor input must be 256x256");
  params.validate();

  const std::size_t side = arch::kInputSize;
  Activation act{3, side, side, std::vector<double>(3 * side * side)};
  for (std::size_t i = 0; i < side * side; ++i)
    for (std::size_t c = 0; c < 3; ++c) act.data[i * 3 + c] = x_small.planes[c][i];

  for (const ConvLayer& layer : params.conv) act = conv_stride2(act, layer);

  std::vector<double> pooled(act.channels, 0.0);
  const std::size_t plane = act.height * act.width;
  for (std::size_t i = 0; i < plane; ++i)
    for (std::size_t c = 0; c < act.channels; ++c) pooled[c] += act.data[i * act.channels + c];
  for (double& p : pooled) p /= static_cast<double>(plane);

  BranchWeights w{};
  for (std::size_t o = 0; o < arch::kFcOut; ++o) {
    double s = params.fc.bias[o];
    for (std::size_t i = 0; i < arch::kFcIn; ++i) s += static_cast<double>(params.fc.weight[o * arch::kFcIn + i]) * pooled[i];
    w[o] = static_cast<float>(s);
  }
  return w;
}

}  // namespace itm
