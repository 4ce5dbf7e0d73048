#include "itmlut/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "itmlut/error.hpp"
#include "json.hpp"

namespace itm {

namespace {

void require_pq(const Frame& f, const char* what) {
  if (f.convention != SignalConvention::HdrPq2020)
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " expects PQ/BT.2020 frames");
}

void require_pair(const Frame& a, const Frame& b, const char* what) {
  if (!a.same_shape(b)) throw Error(ErrorCode::InvalidArgument, std::string(what) + ": frame shapes differ");
  require_pq(a, what);
  require_pq(b, what);
}

std::vector<double> luma_plane(const Frame& f) {
  std::vector<double> y(f.pixel_count());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = kBt2020Luma[0] * f.planes[0][i] + kBt2020Luma[1] * f.planes[1][i] + kBt2020Luma[2] * f.planes[2][i];
  return y;
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

std::array<double, kSsimWindow> gaussian_taps() {
  std::array<double, kSsimWindow> g{};
  double sum = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    g[i] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    sum += g[i];
  }
  for (double& v : g) v /= sum;
  return g;
}

// Separable 'valid' Gaussian filter: output is (w-10) x (h-10).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h) {
  static const auto taps = gaussian_taps();
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[k] * src[static_cast<std::size_t>(y) * w + x + k];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) s += taps[k] * tmp[static_cast<std::size_t>(y + k) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  return out;
}

}  // namespace

double psnr(const Frame& a, const Frame& b) {
  require_pair(a, b, "psnr");
  double se = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
      const double d = static_cast<double>(a.planes[c][i]) - b.planes[c][i];
      se += d * d;
    }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / (3.0 * static_cast<double>(a.pixel_count()));
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Frame& a, const Frame& b) {
  require_pair(a, b, "ssim");
  if (a.width < kSsimWindow || a.height < kSsimWindow)
    throw Error(ErrorCode::InvalidArgument, "ssim needs frames of at least 11x11");
  const int w = a.width, h = a.height;
  const auto la = luma_plane(a);
  const auto lb = luma_plane(b);
  std::vector<double> aa(la.size()), bb(la.size()), ab(la.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    aa[i] = la[i] * la[i];
    bb[i] = lb[i] * lb[i];
    ab[i] = la[i] * lb[i];
  }
  const auto mu_a = filter_valid(la, w, h);
  const auto mu_b = filter_valid(lb, w, h);
  const auto e_aa = filter_valid(aa, w, h);
  const auto e_bb = filter_valid(bb, w, h);
  const auto e_ab = filter_valid(ab, w, h);

  constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
  constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
    sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return sum / static_cast<double>(mu_a.size());
}

Rgb pq_rgb_to_ictcp(const Rgb& pq_rgb) {
  Rgb lin{};
  for (int c = 0; c < 3; ++c) lin[c] = pq_decode(pq_rgb[c]);
  const double l = (1688.0 * lin[0] + 2146.0 * lin[1] + 262.0 * lin[2]) / 4096.0;
  const double m = (683.0 * lin[0] + 2951.0 * lin[1] + 462.0 * lin[2]) / 4096.0;
  const double s = (99.0 * lin[0] + 309.0 * lin[1] + 3688.0 * lin[2]) / 4096.0;
  const double lp = pq_encode(l), mp = pq_encode(m), sp = pq_encode(s);
  return {0.5 * lp + 0.5 * mp, (6610.0 * lp - 13613.0 * mp + 7003.0 * sp) / 4096.0,
          (17933.0 * lp - 17390.0 * mp - 543.0 * sp) / 4096.0};
}

DeltaEItp delta_e_itp(const Frame& a, const Frame& b) {
  require_pair(a, b, "delta_e_itp");
  std::vector<double> de(a.pixel_count());
  double sum = 0.0;
  for (std::size_t i = 0; i < de.size(); ++i) {
    const Rgb ia = pq_rgb_to_ictcp({a.planes[0][i], a.planes[1][i], a.planes[2][i]});
    const Rgb ib = pq_rgb_to_ictcp({b.planes[0][i], b.planes[1][i], b.planes[2][i]});
    const double di = ia[0] - ib[0], dt = 0.5 * (ia[1] - ib[1]), dp = ia[2] - ib[2];
    de[i] = 720.0 * std::sqrt(di * di + dt * dt + dp * dp);
    sum += de[i];
  }
  DeltaEItp out;
  out.mean = sum / static_cast<double>(de.size());
  const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(de.size()))) - 1;
  std::nth_element(de.begin(), de.begin() + static_cast<std::ptrdiff_t>(rank), de.end());
  out.p95 = de[rank];
  return out;
}

HdrWcgVolume hdr_wcg_volume(const Frame& y) {
  require_pq(y, "hdr_wcg_volume");
  std::size_t highlight = 0, wide = 0;
  double highlight_extent = 0.0, wide_extent = 0.0;
  for (std::size_t i = 0; i < y.pixel_count(); ++i) {
    const Rgb nits{pq_decode(y.planes[0][i]), pq_decode(y.planes[1][i]), pq_decode(y.planes[2][i])};
    const double lum = kBt2020Luma[0] * nits[0] + kBt2020Luma[1] * nits[1] + kBt2020Luma[2] * nits[2];
    if (lum > 100.0) ++highlight;
    highlight_extent += std::max(0.0, lum - 100.0) / 9900.0;

    const Rgb rel{nits[0] / kPqPeakNits, nits[1] / kPqPeakNits, nits[2] / kPqPeakNits};
    const Rgb narrow = convert_gamut(rel, kBt2020ToBt709);
    double excursion = 0.0;
    bool outside = false;
    for (double v : narrow) {
      if (v < -1e-4) outside = true;
      if (v < 0.0) excursion -= v;
    }
    if (outside) ++wide;
    wide_extent += std::min(excursion, 1.0);
  }
  const double count = static_cast<double>(y.pixel_count());
  return {100.0 * highlight / count, 100.0 * highlight_extent / count, 100.0 * wide / count,
          100.0 * wide_extent / count};
}

MetricReport evaluate(const Frame& test, const Frame& reference) {
  MetricReport r;
  r.psnr_db = psnr(test, reference);
  r.ssim = ssim(test, reference);
  const DeltaEItp de = delta_e_itp(test, reference);
  r.delta_e_itp_mean = de.mean;
  r.delta_e_itp_p95 = de.p95;
  r.volume = hdr_wcg_volume(test);
  return r;
}

std::string to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  if (std::isinf(r.psnr_db)) {
    j["psnr_db"] = "inf";
  } else {
    j["psnr_db"] = r.psnr_db;
  }
  j["ssim"] = r.ssim;
  j["delta_e_itp_mean"] = r.delta_e_itp_mean;
  j["delta_e_itp_p95"] = r.delta_e_itp_p95;
  j["fhlp_pct"] = r.volume.fhlp_pct;
  j["ehl_pct"] = r.volume.ehl_pct;
  j["fwgp_pct"] = r.volume.fwgp_pct;
  j["ewg_pct"] = r.volume.ewg_pct;
  j["notes"] = "fhlp/ehl/fwgp/ewg are approximate definitions; compare rankings, not absolute values";
  return j.dump(2);
}

}  // namespace itm
