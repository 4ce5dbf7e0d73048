#pragma once

#include <string>

#include "itmlut/colorspace.hpp"
#include "itmlut/frame.hpp"

namespace itm {

/// PSNR in dB over all samples in code space. Identical frames give +inf.
double psnr(const Frame& a, const Frame& b);

/// Single-scale SSIM on the BT.2020-weighted luma of the code values
/// (11x11 Gaussian, sigma 1.5, k1 0.01, k2 0.03), averaged over window
/// centres whose window lies fully inside the frame.
double ssim(const Frame& a, const Frame& b);

/// PQ code triple (BT.2020) to ICtCp per BT.2100.
Rgb pq_rgb_to_ictcp(const Rgb& pq_rgb);

struct DeltaEItp {
  double mean = 0.0;
  double p95 = 0.0;
};

/// BT.2124 colour difference, 720 * sqrt(dI^2 + (0.5 dCt)^2 + dCp^2).
DeltaEItp delta_e_itp(const Frame& a, const Frame& b);

/// Highlight and wide-gamut statistics of a PQ BT.2020 frame (percent).
/// These follow the published metric names but are approximations:
///   fhlp: pixels brighter than 100 nit
///   ehl:  mean of max(0, Y - 100) / 9900
///   fwgp: pixels with a BT.709 component below -1e-4 (linear, 1 = 10000 nit)
///   ewg:  mean total negative BT.709 excursion, clamped at 1
struct HdrWcgVolume {
  double fhlp_pct = 0.0;
  double ehl_pct = 0.0;
  double fwgp_pct = 0.0;
  double ewg_pct = 0.0;
};

HdrWcgVolume hdr_wcg_volume(const Frame& y);

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double delta_e_itp_mean = 0.0;
  double delta_e_itp_p95 = 0.0;
  HdrWcgVolume volume;
};

/// `test` is scored against `reference`; the volume statistics describe `test`.
MetricReport evaluate(const Frame& test, const Frame& reference);
std::string to_json(const MetricReport& report);

}  // namespace itm
