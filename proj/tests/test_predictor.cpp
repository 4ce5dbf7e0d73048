#include <cmath>
#include <random>

#include "doctest.h"
#include "itmlut/error.hpp"
#include "itmlut/predictor.hpp"
#include "oracles.hpp"

using namespace itm;

TEST_CASE("parameter count equals the sum of declared shapes") {
  const PredictorWeights p = PredictorWeights::zeros();
  std::size_t total = 0;
  for (const auto& c : p.conv) total += c.weight.size() + c.bias.size();
  total += p.fc.weight.size() + p.fc.bias.size();
  CHECK(total == arch::parameter_count());
  CHECK(p.parameter_count() == arch::parameter_count());
  CHECK(arch::parameter_count() == 245669);
}

TEST_CASE("shape violations are bundle corruption") {
  PredictorWeights p = PredictorWeights::zeros();
  p.conv[2].weight.pop_back();
  try {
    p.validate();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BundleCorruption);
  }
}

TEST_CASE("zero network returns the output bias") {
  std::mt19937_64 rng(1);
  const Frame x = oracle::random_frame(256, 256, rng);
  const BranchWeights w = predict_weights(x, PredictorWeights::constant({0.5f, -1.25f, 0.0f, 3.0f, 0.1f}));
  CHECK(w[0] == 0.5);
  CHECK(w[1] == -1.25);
  CHECK(w[2] == 0.0);
  CHECK(w[3] == 3.0);
  CHECK(w[4] == static_cast<double>(0.1f));
}

TEST_CASE("identity head on a zero input returns zeros") {
  PredictorWeights p = PredictorWeights::zeros();
  for (std::size_t i = 0; i < 5; ++i) p.fc.weight[i * arch::kFcIn + i] = 1.0f;
  const Frame x(256, 256, SignalConvention::SdrGamma709, 0.0f);
  const BranchWeights w = predict_weights(x, p);
  for (double v : w) CHECK(v == 0.0);
}

TEST_CASE("forward pass matches a direct convolution") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 2; ++trial) {
    const PredictorWeights p = PredictorWeights::random(100 + trial, 1.5);
    const Frame x = oracle::random_frame(256, 256, rng);
    const BranchWeights w = predict_weights(x, p);
    std::vector<double> act(3 * 256 * 256);
    for (int c = 0; c < 3; ++c)
      for (int i = 0; i < 256 * 256; ++i) act[c * 256 * 256 + i] = x.planes[c][i];
    const auto ref = oracle::forward(act, p);
    for (int i = 0; i < 5; ++i) CHECK(w[i] == doctest::Approx(ref[i]).epsilon(1e-6));
  }
}

TEST_CASE("forward pass is deterministic and finite") {
  std::mt19937_64 rng(3);
  PredictorWeights p = PredictorWeights::random(9, 1.0);
  // Push parameters towards the [-10, 10] edge.
  for (auto& c : p.conv)
    for (float& v : c.weight) v = std::clamp(v * 20.0f, -10.0f, 10.0f);
  const Frame x = oracle::random_frame(256, 256, rng);
  const BranchWeights a = predict_weights(x, p), b = predict_weights(x, p);
  CHECK(a == b);
  for (double v : a) CHECK(std::isfinite(v));

  // Piecewise linear in the input: a step 1000x smaller moves the output
  // roughly 1000x less.
  for (int k = 0; k <= 10; ++k) {
    const float c = 0.05f + 0.09f * k;
    const BranchWeights w0 = predict_weights(Frame(256, 256, SignalConvention::SdrGamma709, c), p);
    const BranchWeights big = predict_weights(Frame(256, 256, SignalConvention::SdrGamma709, c + 1e-2f), p);
    const BranchWeights tiny = predict_weights(Frame(256, 256, SignalConvention::SdrGamma709, c + 1e-5f), p);
    for (int i = 0; i < 5; ++i) {
      CHECK(std::isfinite(w0[i]));
      CHECK(std::abs(tiny[i] - w0[i]) <= 0.01 * std::abs(big[i] - w0[i]) + 1e-6 * (1.0 + std::abs(w0[i])));
    }
  }
}

TEST_CASE("predictor rejects wrong input sizes") {
  const Frame x(128, 256, SignalConvention::SdrGamma709);
  CHECK_THROWS_AS(predict_weights(x, PredictorWeights::zeros()), Error);
}

TEST_CASE("downsample") {
  const Frame c(640, 360, SignalConvention::SdrGamma709, 0.37f);
  const Frame d = downsample(c);
  CHECK(d.width == 256);
  CHECK(d.height == 256);
  for (const auto& plane : d.planes)
    for (float v : plane) REQUIRE(v == doctest::Approx(0.37f).epsilon(1e-6));

  std::mt19937_64 rng(4);
  const Frame x = oracle::random_frame(256, 256, rng);
  const Frame same = downsample(x);
  for (int ch = 0; ch < 3; ++ch)
    for (std::size_t i = 0; i < x.pixel_count(); ++i) REQUIRE(std::abs(same.planes[ch][i] - x.planes[ch][i]) <= 1e-6);

  Frame checker(512, 512, SignalConvention::SdrGamma709);
  for (int y = 0; y < 512; ++y)
    for (int xx = 0; xx < 512; ++xx)
      for (int ch = 0; ch < 3; ++ch) checker.at(ch, xx, y) = static_cast<float>((xx + y) % 2);
  const Frame dc = downsample(checker);
  double mean = 0.0;
  for (float v : dc.planes[0]) {
    REQUIRE(std::abs(v - 0.5) <= 0.25);
    mean += v;
  }
  CHECK(mean / dc.pixel_count() == doctest::Approx(0.5).epsilon(1e-6));

  for (const auto& [w, h] : {std::pair{8, 8}, std::pair{1920, 1080}, std::pair{31, 500}}) {
    const Frame in = oracle::random_frame(w, h, rng);
    const Frame out = downsample(in);
    const auto ref = oracle::resize256(in);
    for (int ch = 0; ch < 3; ++ch)
      for (std::size_t i = 0; i < out.pixel_count(); ++i)
        REQUIRE(std::abs(out.planes[ch][i] - ref[ch * 256 * 256 + i]) <= 1e-6);
  }
  CHECK_THROWS_AS(downsample(Frame(7, 100, SignalConvention::SdrGamma709)), Error);
}
