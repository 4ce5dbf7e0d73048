#pragma once

#include <array>
#include <cstdint>

namespace itm {

using Rgb = std::array<double, 3>;

/// Pure power-law SDR decode exponent (gamma 1/0.45, no linear toe).
inline constexpr double kSdrDecodeExponent = 1.0 / 0.45;
/// Alternate display-referred decode, opt-in only.
inline constexpr double kSdrDecodeExponentBt1886 = 2.4;

inline constexpr double kPqPeakNits = 10000.0;

/// SMPTE ST 2084 constants.
namespace pq {
inline constexpr double m1 = 2610.0 / 16384.0;
inline constexpr double m2 = 2523.0 / 4096.0 * 128.0;
inline constexpr double c1 = 3424.0 / 4096.0;
inline constexpr double c2 = 2413.0 / 4096.0 * 32.0;
inline constexpr double c3 = 2392.0 / 4096.0 * 32.0;
}  // namespace pq

enum class TransferKind { GammaDecode, GammaEncode, PqEncode, PqDecode };

/// A transfer function with its parameter. PQ variants ignore `exponent`;
/// PqEncode takes absolute nits, PqDecode returns absolute nits.
struct TransferFn {
  TransferKind kind;
  double exponent = kSdrDecodeExponent;

  double operator()(double v) const;
};

struct GamutMatrix {
  std::array<std::array<double, 3>, 3> m;

  Rgb operator*(const Rgb& rgb) const;
};

extern const GamutMatrix kBt709ToBt2020;
extern const GamutMatrix kBt2020ToBt709;

/// BT.2020 luminance weights (row Y of the RGB->XYZ matrix).
inline constexpr Rgb kBt2020Luma = {0.2627, 0.6780, 0.0593};

double gamma_decode(double v, double exponent = kSdrDecodeExponent);
double gamma_encode(double v, double exponent = kSdrDecodeExponent);

/// Absolute luminance (nit) to PQ code value.
double pq_encode(double nits);
/// PQ code value to absolute luminance (nit).
double pq_decode(double code);

Rgb convert_gamut(const Rgb& rgb, const GamutMatrix& m);

/// Number of inputs clamped into range by any transfer, lookup or frame
/// reader since the last reset. Process-wide.
std::uint64_t clamp_count();
void reset_clamp_count();
void note_clamped(std::uint64_t n = 1);

/// Clamp to [0,1], counting out-of-range inputs.
double clamp_unit(double v);

}  // namespace itm
