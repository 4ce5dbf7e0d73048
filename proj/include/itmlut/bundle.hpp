#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itmlut/contribution.hpp"
#include "itmlut/cube.hpp"
#include "itmlut/lut.hpp"
#include "itmlut/predictor.hpp"

namespace itm {

/// Bundle binary layout (all integers little-endian):
///
///   offset  size  field
///   0       8     magic "ITMLUT1\n"
///   8       8     u64 header length H
///   16      H     UTF-8 JSON header (metadata + ordered tensor manifest)
///   16+H    P     float32 payload; P = header["payload_bytes"]
///
/// Each manifest entry gives name, shape, byte offset into the payload and
/// byte length. Trailing bytes after the payload are rejected.
inline constexpr std::string_view kBundleMagic = "ITMLUT1\n";
inline constexpr std::uint32_t kBundleVersion = 1;

enum class VertexMode { Eq2, Uniform, FromFile };

std::string_view to_string(VertexMode m);
/// Accepts `eq2`, `uniform`, `file`.
VertexMode parse_vertex_mode(std::string_view s);

struct Bundle {
  std::uint32_t version = kBundleVersion;
  std::size_t n = 17;
  VertexMode vertex_mode = VertexMode::Eq2;
  ContributionParams contribution;
  /// basis[branch][i], branch order bright, middle, dark.
  std::array<std::array<LutContent, kBasisPerBranch>, 3> basis;
  std::array<PredictorWeights, 3> predictor;
  /// Required iff vertex_mode == FromFile.
  std::optional<std::array<VertexGrid, 3>> fixed_vertices;
  std::string notes;

  void validate() const;

  bool operator==(const Bundle&) const = default;
};

std::vector<std::uint8_t> save_bundle(const Bundle& bundle);
Bundle load_bundle(std::span<const std::uint8_t> bytes);

/// FNV-1a 64 of each tensor's payload bytes, keyed by manifest name.
std::map<std::string, std::uint64_t> tensor_checksums(std::span<const std::uint8_t> bytes);

enum class InitBasis { C100DW, C203DW, Identity, AllOnes };

/// Analytic initialization lattice on a uniform grid of size n. The
/// diffuse-white variants decode SDR with `sdr_exponent`, convert BT.709 to
/// BT.2020 and PQ-encode with diffuse white at 100 or 203 nit.
LutContent make_init_basis(InitBasis which, std::size_t n, double sdr_exponent = kSdrDecodeExponent);

enum class InitScheme { Table3, C100x5, IdentityPlusOnes };
InitScheme parse_init_scheme(std::string_view s);

struct InitOptions {
  std::size_t n = 17;
  InitScheme scheme = InitScheme::Table3;
  /// Slot 1 and slot 3 sources for Table3; C_100DW / C_203DW when absent.
  std::optional<CubeFile> ocio2;
  std::optional<CubeFile> davinci;
  double sdr_exponent = kSdrDecodeExponent;
  VertexMode vertex_mode = VertexMode::Eq2;
  ContributionParams contribution;
  /// Constant predictor output unless `random_seed` is set.
  std::array<float, kBasisPerBranch> constant_weights = {1.0f, 0.0f, 0.0f, 0.0f, 0.0f};
  std::optional<std::uint64_t> random_seed;
  double random_scale = 1.0;
};

struct InitResult {
  Bundle bundle;
  std::vector<std::string> warnings;
};

InitResult make_init_bundle(const InitOptions& options);

}  // namespace itm
