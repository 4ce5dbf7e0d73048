#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "itmlut/frame.hpp"

namespace itm {

/// Interchange formats:
///  - Ppm16: Netpbm P6 with maxval 65535, big-endian samples, code = v/65535.
///  - RawF32: 16-byte header {"ITMF", u32 width, u32 height, u32 channels=3}
///    (little-endian) followed by planar little-endian float32 samples.
///  - Png16: 16-bit RGB PNG; available when built with libpng.
enum class FrameFormat { Ppm16, RawF32, Png16 };

FrameFormat parse_frame_format(std::string_view s);
/// Guesses from the extension: .ppm, .raw/.itmf, .png.
FrameFormat format_from_path(const std::filesystem::path& path);
bool png_supported();

/// Out-of-range float samples are clamped and counted (see clamp_count()).
Frame read_frame(std::span<const std::uint8_t> bytes, FrameFormat format, SignalConvention convention);
std::vector<std::uint8_t> write_frame(const Frame& frame, FrameFormat format);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Signal-convention sidecar, stored next to a frame as `<path>.json`.
std::filesystem::path sidecar_path(const std::filesystem::path& frame_path);
void write_sidecar(const std::filesystem::path& frame_path, const Frame& frame);
/// Convention recorded in the sidecar, or `fallback` when none exists.
SignalConvention read_sidecar(const std::filesystem::path& frame_path, SignalConvention fallback);

/// Frame plus sidecar in one call.
Frame load_frame(const std::filesystem::path& path, SignalConvention fallback);
void save_frame(const std::filesystem::path& path, const Frame& frame);

}  // namespace itm
