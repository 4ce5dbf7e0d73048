#include "itmlut/colorspace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "itmlut/error.hpp"

namespace itm {

namespace {
std::atomic<std::uint64_t> g_clamped{0};
}

// Derived from the BT.709 and BT.2020 primaries with a D65 white point.
const GamutMatrix kBt709ToBt2020{{{
    {0.6274038959, 0.3292830384, 0.04331306569},
    {0.06909728936, 0.9195403951, 0.01136231557},
    {0.01639143888, 0.08801330788, 0.8955952532},
}}};

const GamutMatrix kBt2020ToBt709{{{
    {1.660491002, -0.5876411388, -0.07284986332},
    {-0.1245504745, 1.132899897, -0.008349422604},
    {-0.01815076335, -0.1005788980, 1.118729661},
}}};

std::uint64_t clamp_count() { return g_clamped.load(std::memory_order_relaxed); }
void reset_clamp_count() { g_clamped.store(0, std::memory_order_relaxed); }
void note_clamped(std::uint64_t n) { g_clamped.fetch_add(n, std::memory_order_relaxed); }

double clamp_unit(double v) {
  if (v < 0.0) {
    note_clamped();
    return 0.0;
  }
  if (v > 1.0) {
    note_clamped();
    return 1.0;
  }
  return v;
}

double gamma_decode(double v, double exponent) {
  if (!(exponent > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma exponent must be positive");
  return std::pow(clamp_unit(v), exponent);
}

double gamma_encode(double v, double exponent) {
  if (!(exponent > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma exponent must be positive");
  return std::pow(clamp_unit(v), 1.0 / exponent);
}

double pq_encode(double nits) {
  if (nits < 0.0) {
    note_clamped();
    nits = 0.0;
  } else if (nits > kPqPeakNits) {
    note_clamped();
    nits = kPqPeakNits;
  }
  const double y = std::pow(nits / kPqPeakNits, pq::m1);
  return std::pow((pq::c1 + pq::c2 * y) / (1.0 + pq::c3 * y), pq::m2);
}

double pq_decode(double code) {
  const double e = std::pow(clamp_unit(code), 1.0 / pq::m2);
  const double num = std::max(e - pq::c1, 0.0);
  const double den = pq::c2 - pq::c3 * e;
  return kPqPeakNits * std::pow(num / den, 1.0 / pq::m1);
}

double TransferFn::operator()(double v) const {
  switch (kind) {
    case TransferKind::GammaDecode: return gamma_decode(v, exponent);
    case TransferKind::GammaEncode: return gamma_encode(v, exponent);
    case TransferKind::PqEncode: return pq_encode(v);
    case TransferKind::PqDecode: return pq_decode(v);
  }
  return v;
}

Rgb GamutMatrix::operator*(const Rgb& rgb) const {
  Rgb out{};
  for (int i = 0; i < 3; ++i) out[i] = m[i][0] * rgb[0] + m[i][1] * rgb[1] + m[i][2] * rgb[2];
  return out;
}

Rgb convert_gamut(const Rgb& rgb, const GamutMatrix& m) { return m * rgb; }

}  // namespace itm
