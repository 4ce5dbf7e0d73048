#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

namespace itm {

enum class SignalConvention { SdrGamma709, HdrPq2020 };

std::string_view to_string(SignalConvention c);
SignalConvention parse_convention(std::string_view s);

/// Planar 3-channel image with samples in [0,1].
struct Frame {
  int width = 0;
  int height = 0;
  std::array<std::vector<float>, 3> planes;
  SignalConvention convention = SignalConvention::SdrGamma709;

  Frame() = default;
  Frame(int w, int h, SignalConvention conv, float fill = 0.0f);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  bool same_shape(const Frame& o) const { return width == o.width && height == o.height; }

  float& at(int c, int x, int y) { return planes[c][static_cast<std::size_t>(y) * width + x]; }
  float at(int c, int x, int y) const { return planes[c][static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const Frame&) const = default;
};

}  // namespace itm
