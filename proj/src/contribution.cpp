#include "itmlut/contribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "itmlut/error.hpp"

namespace itm {

std::string_view to_string(ContributionMode m) {
  switch (m) {
    case ContributionMode::LinearEq3: return "eq3";
    case ContributionMode::SoftEq6: return "soft";
    case ContributionMode::Hard: return "hard";
    case ContributionMode::Constant: return "constant";
  }
  return "?";
}

ContributionMode parse_contribution_mode(std::string_view s) {
  if (s == "eq3" || s == "linear") return ContributionMode::LinearEq3;
  if (s == "soft") return ContributionMode::SoftEq6;
  if (s == "hard") return ContributionMode::Hard;
  if (s == "constant") return ContributionMode::Constant;
  throw Error(ErrorCode::InvalidArgument, "unknown contribution mode '" + std::string(s) + "'");
}

void ContributionParams::validate() const {
  switch (mode) {
    case ContributionMode::LinearEq3:
    case ContributionMode::Hard:
      if (!(t_b > 0.0 && t_b < 1.0 && t_d > 0.0 && t_d < 1.0))
        throw Error(ErrorCode::InvalidArgument, "contribution thresholds must lie in (0,1)");
      if (!(t_d < t_b)) throw Error(ErrorCode::InvalidArgument, "contribution requires t_d < t_b");
      break;
    case ContributionMode::SoftEq6:
      if (!(mu > 0.0) || !std::isfinite(mu))
        throw Error(ErrorCode::InvalidArgument, "soft contribution requires finite mu > 0");
      break;
    case ContributionMode::Constant:
      break;
  }
}

BranchShares contribution_at(double x, const ContributionParams& p) {
  x = std::clamp(x, 0.0, 1.0);
  double pb = 0.0, pd = 0.0;
  switch (p.mode) {
    case ContributionMode::LinearEq3:
      pb = std::clamp((x - p.t_b) / (1.0 - p.t_b), 0.0, 1.0);
      pd = std::clamp((p.t_d - x) / p.t_d, 0.0, 1.0);
      break;
    case ContributionMode::SoftEq6: {
      const double denom = std::log1p(p.mu);
      pb = std::clamp(1.0 - std::log1p(p.mu * (1.0 - x)) / denom, 0.0, 1.0);
      pd = std::clamp(1.0 - std::log1p(p.mu * x) / denom, 0.0, 1.0);
      break;
    }
    case ContributionMode::Hard:
      if (x >= p.t_b) return {1.0, 0.0, 0.0};
      if (x <= p.t_d) return {0.0, 0.0, 1.0};
      return {0.0, 1.0, 0.0};
    case ContributionMode::Constant:
      return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  }
  return {pb, std::max(0.0, 1.0 - pb - pd), pd};
}

ContributionMap contribution(const Frame& x, const ContributionParams& params) {
  params.validate();
  ContributionMap map;
  map.width = x.width;
  map.height = x.height;
  const std::size_t count = x.pixel_count();
  for (int c = 0; c < 3; ++c) {
    map.bright[c].resize(count);
    map.middle[c].resize(count);
    map.dark[c].resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const BranchShares s = contribution_at(x.planes[c][i], params);
      map.bright[c][i] = static_cast<float>(s.bright);
      map.middle[c][i] = static_cast<float>(s.middle);
      map.dark[c][i] = static_cast<float>(s.dark);
    }
  }
  return map;
}

Frame fuse(const Frame& yb, const Frame& ym, const Frame& yd, const ContributionMap& map) {
  if (!yb.same_shape(ym) || !yb.same_shape(yd) || yb.width != map.width || yb.height != map.height)
    throw Error(ErrorCode::InvalidArgument, "fuse inputs differ in shape");
  Frame out(yb.width, yb.height, yb.convention);
  const std::size_t count = yb.pixel_count();
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < count; ++i) {
      const BranchShares s{map.bright[c][i], map.middle[c][i], map.dark[c][i]};
      out.planes[c][i] = fuse_sample(s, yb.planes[c][i], ym.planes[c][i], yd.planes[c][i]);
    }
  return out;
}

}  // namespace itm
