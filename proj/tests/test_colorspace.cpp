#include <cmath>
#include <random>

#include "doctest.h"
#include "itmlut/colorspace.hpp"
#include "itmlut/error.hpp"
#include "oracles.hpp"

using namespace itm;

TEST_CASE("gamma decode fixed points and midpoint") {
  CHECK(gamma_decode(0.0) == 0.0);
  CHECK(gamma_decode(1.0) == 1.0);
  // 0.5^(1/0.45), evaluated with mpmath at 50 digits.
  CHECK(gamma_decode(0.5) == doctest::Approx(0.214310995713268).epsilon(1e-14));
  CHECK(gamma_decode(0.5, kSdrDecodeExponentBt1886) == doctest::Approx(std::pow(0.5, 2.4)));
}

TEST_CASE("gamma clamps and counts out-of-range input") {
  reset_clamp_count();
  CHECK(gamma_decode(-0.25) == 0.0);
  CHECK(gamma_decode(1.5) == 1.0);
  CHECK(clamp_count() == 2);
  CHECK_THROWS_AS(gamma_decode(0.5, 0.0), Error);
}

TEST_CASE("gamma round trip on a dense grid") {
  double worst = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double v = i / 10000.0;
    worst = std::max(worst, std::abs(gamma_encode(gamma_decode(v)) - v));
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("PQ reference points") {
  // The closed form leaves c1^m2 ~ 7.3e-7 at zero luminance.
  CHECK(std::abs(pq_encode(0.0)) <= 1e-6);
  CHECK(pq_encode(10000.0) == doctest::Approx(1.0).epsilon(1e-12));
  // mpmath evaluations of the ST 2084 closed form.
  CHECK(std::abs(pq_encode(100.0) - 0.508078421517395) < 1e-12);
  CHECK(std::abs(pq_encode(203.0) - 0.580688881041608) < 1e-12);
  CHECK(std::abs(pq_encode(1000.0) - 0.751827096247042) < 1e-12);
  CHECK(std::abs(pq_encode(100.0) - oracle::st2084_encode(100.0)) < 1e-12);
}

TEST_CASE("PQ is strictly increasing and inverts within 1e-4 relative") {
  double prev = -1.0, worst = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double nits = 0.01 * std::pow(1e6, i / 10000.0);  // 0.01 .. 10000, log spaced
    const double code = pq_encode(nits);
    CHECK(code > prev);
    prev = code;
    worst = std::max(worst, std::abs(pq_decode(code) - nits) / nits);
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("PQ clamps negative luminance") {
  reset_clamp_count();
  CHECK(pq_encode(-5.0) == pq_encode(0.0));
  CHECK(clamp_count() == 1);
}

TEST_CASE("gamut matrices agree with a derivation from the primaries") {
  const auto m = oracle::derive_709_to_2020();
  const auto inv = oracle::inverse(m);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      CHECK(kBt709ToBt2020.m[r][c] == doctest::Approx(m[r][c]).epsilon(1e-9));
      CHECK(kBt2020ToBt709.m[r][c] == doctest::Approx(inv[r][c]).epsilon(1e-9));
    }
}

TEST_CASE("gamut conversion examples") {
  const Rgb white = convert_gamut({1, 1, 1}, kBt709ToBt2020);
  for (double v : white) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  const Rgb black = convert_gamut({0, 0, 0}, kBt709ToBt2020);
  for (double v : black) CHECK(v == 0.0);
  const Rgb red = convert_gamut({1, 0, 0}, kBt709ToBt2020);
  for (double v : red) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  CHECK(red[0] > red[1]);
  CHECK(red[0] > red[2]);
}

TEST_CASE("gamut round trip 709 -> 2020 -> 709") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Rgb x{u(rng), u(rng), u(rng)};
    const Rgb y = convert_gamut(convert_gamut(x, kBt709ToBt2020), kBt2020ToBt709);
    for (int c = 0; c < 3; ++c) worst = std::max(worst, std::abs(y[c] - x[c]));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("BT.2020 luma weights sum to one") {
  CHECK(kBt2020Luma[0] + kBt2020Luma[1] + kBt2020Luma[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transfer function objects dispatch") {
  CHECK(TransferFn{TransferKind::PqEncode}(100.0) == pq_encode(100.0));
  CHECK(TransferFn{TransferKind::PqDecode}(0.5) == pq_decode(0.5));
  CHECK(TransferFn{TransferKind::GammaDecode, 2.4}(0.5) == gamma_decode(0.5, 2.4));
  CHECK(TransferFn{TransferKind::GammaEncode}(0.25) == gamma_encode(0.25));
}
