#include "itmlut/lut.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "itmlut/error.hpp"

namespace itm {

std::string_view to_string(BranchId b) {
  switch (b) {
    case BranchId::Bright: return "bright";
    case BranchId::Middle: return "middle";
    case BranchId::Dark: return "dark";
  }
  return "?";
}

namespace {

void validate_axis(std::span<const double> axis, std::size_t n, char name) {
  if (axis.size() != n)
    throw Error(ErrorCode::InvalidArgument, std::string("vertex axis ") + name + " length differs");
  if (std::abs(axis.front()) > 1e-9 || std::abs(axis.back() - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument, std::string("vertex axis ") + name + " must span [0,1]");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(axis[i] > axis[i - 1]))
      throw Error(ErrorCode::InvalidArgument,
                  std::string("vertex axis ") + name + " not strictly increasing at " +
                      std::to_string(i));
  }
}

}  // namespace

VertexGrid::VertexGrid(std::vector<double> r, std::vector<double> g, std::vector<double> b)
    : axes_{std::move(r), std::move(g), std::move(b)} {
  const std::size_t n = axes_[0].size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "vertex grid needs at least 2 vertices per axis");
  validate_axis(axes_[0], n, 'R');
  validate_axis(axes_[1], n, 'G');
  validate_axis(axes_[2], n, 'B');
}

VertexGrid VertexGrid::uniform(std::size_t n) {
  auto v = uniform_vertices(n);
  return VertexGrid(v, v, v);
}

LutContent::LutContent(std::size_t n, std::vector<float> data) : n_(n), data_(std::move(data)) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "LUT size must be at least 2");
  if (data_.size() != n * n * n * 3)
    throw Error(ErrorCode::InvalidArgument,
                "LUT content has " + std::to_string(data_.size()) + " values, expected " +
                    std::to_string(n * n * n * 3));
}

LutContent LutContent::filled(std::size_t n, float value) {
  return LutContent(n, std::vector<float>(n * n * n * 3, value));
}

LutContent LutContent::identity(std::size_t n) {
  LutContent lut = filled(n, 0.0f);
  const double step = 1.0 / static_cast<double>(n - 1);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t r = 0; r < n; ++r) {
        float* e = lut.at(r, g, b);
        e[0] = static_cast<float>(r * step);
        e[1] = static_cast<float>(g * step);
        e[2] = static_cast<float>(b * step);
      }
  return lut;
}

Lut3D::Lut3D(LutContent content, VertexGrid grid) : content_(std::move(content)), grid_(std::move(grid)) {
  if (content_.size() != grid_.size())
    throw Error(ErrorCode::InvalidArgument, "LUT content size does not match its vertex grid");
}

std::vector<double> uniform_vertices(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "lattice size must be at least 2");
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = static_cast<double>(k) / static_cast<double>(n - 1);
  v.back() = 1.0;
  return v;
}

std::vector<double> redistribute_vertices(BranchId branch, std::size_t n, double channel_mean) {
  std::vector<double> v = uniform_vertices(n);
  const double mean = std::clamp(channel_mean, 0.0, 1.0);
  constexpr double three_pi = 3.0 * std::numbers::pi;
  for (double& u : v) {
    switch (branch) {
      case BranchId::Bright: u = std::pow(u, 1.0 / (1.4 + 0.8 * mean)); break;
      case BranchId::Dark: u = std::pow(u, 2.2 - 0.8 * mean); break;
      case BranchId::Middle: u = (three_pi * u - std::cos(three_pi * u) + 1.0) / (three_pi + 2.0); break;
    }
  }
  v.front() = 0.0;
  v.back() = 1.0;
  return v;
}

VertexGrid gen_vertices(BranchId branch, std::size_t n, const ChannelMeans& means) {
  return VertexGrid(redistribute_vertices(branch, n, means.r), redistribute_vertices(branch, n, means.g),
                    redistribute_vertices(branch, n, means.b));
}

namespace {

struct Cell {
  std::size_t index;
  double t;
};

Cell locate(std::span<const double> axis, double x) {
  const std::size_t n = axis.size();
  auto it = std::upper_bound(axis.begin(), axis.end(), x);
  std::size_t i = static_cast<std::size_t>(it - axis.begin());
  i = i == 0 ? 0 : std::min(i - 1, n - 2);
  const double width = axis[i + 1] - axis[i];
  if (!(width > 0.0)) throw Error(ErrorCode::InternalCorruption, "degenerate LUT cell width");
  return {i, (x - axis[i]) / width};
}

}  // namespace

Rgb lookup(const Lut3D& lut, const Rgb& rgb) {
  const VertexGrid& grid = lut.grid();
  const Cell cr = locate(grid.axis(0), clamp_unit(rgb[0]));
  const Cell cg = locate(grid.axis(1), clamp_unit(rgb[1]));
  const Cell cb = locate(grid.axis(2), clamp_unit(rgb[2]));

  const LutContent& c = lut.content();
  const std::size_t n = c.size();
  const std::size_t sr = 3, sg = 3 * n, sb = 3 * n * n;
  const float* p000 = c.at(cr.index, cg.index, cb.index);

  Rgb out{};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    const float* p = p000 + ch;
    // Interpolate along R, then G, then B.
    const double c00 = p[0] + cr.t * (p[sr] - p[0]);
    const double c10 = p[sg] + cr.t * (p[sg + sr] - p[sg]);
    const double c01 = p[sb] + cr.t * (p[sb + sr] - p[sb]);
    const double c11 = p[sb + sg] + cr.t * (p[sb + sg + sr] - p[sb + sg]);
    const double c0 = c00 + cg.t * (c10 - c00);
    const double c1 = c01 + cg.t * (c11 - c01);
    out[ch] = c0 + cb.t * (c1 - c0);
  }
  return out;
}

LutContent merge_luts(std::span<const LutContent> basis, std::span<const double> weights) {
  if (basis.empty()) throw Error(ErrorCode::InvalidArgument, "merge needs at least one basis LUT");
  if (basis.size() != weights.size())
    throw Error(ErrorCode::InvalidArgument, "merge weight count differs from basis count");
  const std::size_t n = basis[0].size();
  for (const auto& b : basis)
    if (b.size() != n) throw Error(ErrorCode::InvalidArgument, "basis LUTs have mismatched sizes");

  std::vector<float> out(n * n * n * 3);
  for (std::size_t e = 0; e < out.size(); ++e) {
    double acc = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) acc += weights[i] * basis[i].data()[e];
    out[e] = static_cast<float>(acc);
  }
  return LutContent(n, std::move(out));
}

double reg_smoothness(const LutContent& lut) {
  const std::size_t n = lut.size();
  double sum = 0.0;
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t r = 0; r < n; ++r) {
        const float* e = lut.at(r, g, b);
        for (std::size_t ch = 0; ch < 3; ++ch) {
          if (r + 1 < n) {
            const double d = static_cast<double>(lut.at(r + 1, g, b)[ch]) - e[ch];
            sum += d * d;
          }
          if (g + 1 < n) {
            const double d = static_cast<double>(lut.at(r, g + 1, b)[ch]) - e[ch];
            sum += d * d;
          }
          if (b + 1 < n) {
            const double d = static_cast<double>(lut.at(r, g, b + 1)[ch]) - e[ch];
            sum += d * d;
          }
        }
      }
  return sum;
}

double reg_monotonicity(const LutContent& lut) {
  const std::size_t n = lut.size();
  double sum = 0.0;
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t r = 0; r < n; ++r) {
        const float* e = lut.at(r, g, b);
        if (r + 1 < n) sum += std::max(0.0, static_cast<double>(e[0]) - lut.at(r + 1, g, b)[0]);
        if (g + 1 < n) sum += std::max(0.0, static_cast<double>(e[1]) - lut.at(r, g + 1, b)[1]);
        if (b + 1 < n) sum += std::max(0.0, static_cast<double>(e[2]) - lut.at(r, g, b + 1)[2]);
      }
  return sum;
}

}  // namespace itm
