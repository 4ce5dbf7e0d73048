#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "itmlut/colorspace.hpp"
#include "itmlut/lut.hpp"

namespace itm {

/// In-memory `.cube` 3D LUT. `data` holds size^3 triples, R fastest.
struct CubeFile {
  std::string title;
  std::size_t size = 0;
  Rgb domain_min{0.0, 0.0, 0.0};
  Rgb domain_max{1.0, 1.0, 1.0};
  std::vector<double> data;

  bool operator==(const CubeFile&) const = default;
};

/// Parses `.cube` text. Errors carry the 1-based offending line.
CubeFile parse_cube(std::string_view text);
/// Emits LUT_3D_SIZE, DOMAIN_MIN/MAX and triples at six decimals.
std::string write_cube(const CubeFile& cube);

CubeFile cube_from_lut(const LutContent& lut, std::string title = {});

/// Resamples a cube onto a uniform lattice of size `n` by trilinear lookup
/// over the cube's (uniform) domain.
LutContent resample_cube(const CubeFile& cube, std::size_t n);

}  // namespace itm
