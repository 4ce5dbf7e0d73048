#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "itmlut/colorspace.hpp"

namespace itm {

enum class BranchId { Bright = 0, Middle = 1, Dark = 2 };

inline constexpr std::array<BranchId, 3> kBranches = {BranchId::Bright, BranchId::Middle,
                                                      BranchId::Dark};
inline constexpr std::size_t kBasisPerBranch = 5;

std::string_view to_string(BranchId b);
inline std::size_t index_of(BranchId b) { return static_cast<std::size_t>(b); }

/// Per-channel arithmetic means of a frame, each in [0,1].
struct ChannelMeans {
  double r = 0.5;
  double g = 0.5;
  double b = 0.5;

  double operator[](std::size_t c) const { return c == 0 ? r : (c == 1 ? g : b); }
};

/// Per-axis strictly increasing vertex positions spanning [0,1].
class VertexGrid {
 public:
  VertexGrid(std::vector<double> r, std::vector<double> g, std::vector<double> b);
  static VertexGrid uniform(std::size_t n);

  std::size_t size() const { return axes_[0].size(); }
  std::span<const double> axis(std::size_t c) const { return axes_[c]; }

  bool operator==(const VertexGrid&) const = default;

 private:
  std::array<std::vector<double>, 3> axes_;
};

/// Dense N^3 x 3 lattice of output triples. R is the fastest-varying input
/// axis: entry (r,g,b) channel c lives at ((b*N + g)*N + r)*3 + c.
class LutContent {
 public:
  LutContent() = default;
  LutContent(std::size_t n, std::vector<float> data);
  static LutContent filled(std::size_t n, float value);
  static LutContent identity(std::size_t n);

  std::size_t size() const { return n_; }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  static std::size_t offset(std::size_t n, std::size_t r, std::size_t g, std::size_t b) {
    return ((b * n + g) * n + r) * 3;
  }
  const float* at(std::size_t r, std::size_t g, std::size_t b) const {
    return data_.data() + offset(n_, r, g, b);
  }
  float* at(std::size_t r, std::size_t g, std::size_t b) { return data_.data() + offset(n_, r, g, b); }

  bool operator==(const LutContent&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<float> data_;
};

/// Content paired with the grid it is sampled on.
class Lut3D {
 public:
  Lut3D(LutContent content, VertexGrid grid);

  std::size_t size() const { return content_.size(); }
  const LutContent& content() const { return content_; }
  const VertexGrid& grid() const { return grid_; }

 private:
  LutContent content_;
  VertexGrid grid_;
};

std::vector<double> uniform_vertices(std::size_t n);

/// Branch-specific vertex redistribution. Bright packs vertices towards 1,
/// Dark towards 0 (both adapt to the channel mean), Middle towards 0.5.
std::vector<double> redistribute_vertices(BranchId branch, std::size_t n, double channel_mean);
VertexGrid gen_vertices(BranchId branch, std::size_t n, const ChannelMeans& means);

/// Trilinear lookup on a possibly non-uniform grid. Inputs outside [0,1] are
/// clamped and counted.
Rgb lookup(const Lut3D& lut, const Rgb& rgb);

/// Elementwise weighted sum of basis lattices, accumulated in double.
LutContent merge_luts(std::span<const LutContent> basis, std::span<const double> weights);

/// Sum of squared forward differences over every axis and output channel.
double reg_smoothness(const LutContent& lut);
/// Hinge on decreasing steps of the channel matching each axis.
double reg_monotonicity(const LutContent& lut);

}  // namespace itm
