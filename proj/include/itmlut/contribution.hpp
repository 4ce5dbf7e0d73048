#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "itmlut/frame.hpp"

namespace itm {

enum class ContributionMode { LinearEq3, SoftEq6, Hard, Constant };

std::string_view to_string(ContributionMode m);
/// Accepts the CLI spellings `eq3`, `soft`, `hard`, `constant`.
ContributionMode parse_contribution_mode(std::string_view s);

struct ContributionParams {
  ContributionMode mode = ContributionMode::LinearEq3;
  double t_b = 0.55;
  double t_d = 0.45;
  double mu = 5000.0;

  /// Hard segmentation at thirds.
  static ContributionParams hard() { return {ContributionMode::Hard, 2.0 / 3.0, 1.0 / 3.0, 5000.0}; }

  /// Throws InvalidArgument when thresholds or mu are out of range for the mode.
  void validate() const;

  bool operator==(const ContributionParams&) const = default;
};

/// Weights of the bright, middle and dark branches for one sample.
struct BranchShares {
  double bright;
  double middle;
  double dark;
};

BranchShares contribution_at(double x, const ContributionParams& params);

/// Per-sample, per-channel weight planes.
struct ContributionMap {
  int width = 0;
  int height = 0;
  std::array<std::vector<float>, 3> bright;
  std::array<std::vector<float>, 3> middle;
  std::array<std::vector<float>, 3> dark;
};

ContributionMap contribution(const Frame& x, const ContributionParams& params);

/// Weighted sum of three branch results, clamped to [0,1].
inline float fuse_sample(const BranchShares& p, double yb, double ym, double yd) {
  const double y = p.bright * yb + p.middle * ym + p.dark * yd;
  return static_cast<float>(y < 0.0 ? 0.0 : (y > 1.0 ? 1.0 : y));
}

/// Output carries the convention of `y_bright`.
Frame fuse(const Frame& y_bright, const Frame& y_middle, const Frame& y_dark, const ContributionMap& map);

}  // namespace itm
