#include "itmlut/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "itmlut/colorspace.hpp"
#include "itmlut/error.hpp"
#include "json.hpp"

#ifdef ITMLUT_HAVE_PNG
#include <png.h>
#endif

namespace itm {

std::string_view to_string(SignalConvention c) {
  return c == SignalConvention::SdrGamma709 ? "sdr-gamma709" : "hdr-pq2020";
}

SignalConvention parse_convention(std::string_view s) {
  if (s == "sdr-gamma709" || s == "sdr") return SignalConvention::SdrGamma709;
  if (s == "hdr-pq2020" || s == "hdr") return SignalConvention::HdrPq2020;
  throw Error(ErrorCode::InvalidArgument, "unknown signal convention '" + std::string(s) + "'");
}

Frame::Frame(int w, int h, SignalConvention conv, float fill) : width(w), height(h), convention(conv) {
  if (w <= 0 || h <= 0) throw Error(ErrorCode::InvalidArgument, "frame dimensions must be positive");
  for (auto& p : planes) p.assign(pixel_count(), fill);
}

FrameFormat parse_frame_format(std::string_view s) {
  if (s == "ppm") return FrameFormat::Ppm16;
  if (s == "raw") return FrameFormat::RawF32;
  if (s == "png") return FrameFormat::Png16;
  throw Error(ErrorCode::InvalidArgument, "unknown frame format '" + std::string(s) + "'");
}

FrameFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".ppm") return FrameFormat::Ppm16;
  if (ext == ".raw" || ext == ".itmf") return FrameFormat::RawF32;
  if (ext == ".png") return FrameFormat::Png16;
  throw Error(ErrorCode::InvalidArgument, "cannot infer frame format from '" + path.string() + "'");
}

bool png_supported() {
#ifdef ITMLUT_HAVE_PNG
  return true;
#else
  return false;
#endif
}

namespace {

constexpr int kMaxDimension = 1 << 16;

std::uint16_t quantize16(float v) {
  const double c = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(c * 65535.0));
}

// ---------------------------------------------------------------------------
// PPM

class PpmHeaderReader {
 public:
  explicit PpmHeaderReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  long read_int(const char* what) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw Error(ErrorCode::ShortFile, std::string("PPM header ends before ") + what);
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      ++pos_;
      if (++digits > 9) throw Error(ErrorCode::Parse, std::string("PPM ") + what + " too large");
    }
    if (digits == 0) throw Error(ErrorCode::Parse, std::string("PPM ") + what + " is not a number");
    return v;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

Frame read_ppm(std::span<const std::uint8_t> bytes, SignalConvention convention) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw Error(ErrorCode::BadMagic, "not a binary PPM (expected P6)");
  PpmHeaderReader hdr(bytes);
  const long w = hdr.read_int("width");
  const long h = hdr.read_int("height");
  const long maxval = hdr.read_int("maxval");
  if (w <= 0 || h <= 0 || w > kMaxDimension || h > kMaxDimension)
    throw Error(ErrorCode::Parse, "PPM dimensions out of range");
  if (maxval != 65535) throw Error(ErrorCode::UnsupportedMaxval, "PPM maxval " + std::to_string(maxval) + " is not 65535");
  if (hdr.pos() >= bytes.size()) throw Error(ErrorCode::ShortFile, "PPM header not terminated");
  hdr.advance();  // Single whitespace byte before the raster.

  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t need = count * 6;
  if (bytes.size() - hdr.pos() < need)
    throw Error(ErrorCode::ShortFile, "PPM raster has " + std::to_string(bytes.size() - hdr.pos()) +
                                          " bytes, expected " + std::to_string(need));

  Frame f(static_cast<int>(w), static_cast<int>(h), convention);
  const std::uint8_t* p = bytes.data() + hdr.pos();
  for (std::size_t i = 0; i < count; ++i)
    for (int c = 0; c < 3; ++c, p += 2) f.planes[c][i] = static_cast<float>(((p[0] << 8) | p[1]) / 65535.0);
  return f;
}

std::vector<std::uint8_t> write_ppm(const Frame& f) {
  const std::string header = "P6\n" + std::to_string(f.width) + " " + std::to_string(f.height) + "\n65535\n";
  std::vector<std::uint8_t> out(header.size() + f.pixel_count() * 6);
  std::memcpy(out.data(), header.data(), header.size());
  std::uint8_t* p = out.data() + header.size();
  for (std::size_t i = 0; i < f.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c) {
      const std::uint16_t q = quantize16(f.planes[c][i]);
      *p++ = static_cast<std::uint8_t>(q >> 8);
      *p++ = static_cast<std::uint8_t>(q & 0xff);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Raw float32

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

Frame read_raw(std::span<const std::uint8_t> bytes, SignalConvention convention) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "ITMF", 4) != 0)
    throw Error(ErrorCode::BadMagic, "not a raw float frame (expected ITMF)");
  if (bytes.size() < 16) throw Error(ErrorCode::ShortFile, "raw frame header truncated");
  const std::uint32_t w = get_u32(bytes.data() + 4);
  const std::uint32_t h = get_u32(bytes.data() + 8);
  const std::uint32_t ch = get_u32(bytes.data() + 12);
  if (ch != 3) throw Error(ErrorCode::Parse, "raw frame must have 3 channels, has " + std::to_string(ch));
  if (w == 0 || h == 0 || w > kMaxDimension || h > kMaxDimension)
    throw Error(ErrorCode::Parse, "raw frame dimensions out of range");
  const std::size_t count = static_cast<std::size_t>(w) * h;
  const std::size_t need = count * 3 * 4;
  if (bytes.size() - 16 < need)
    throw Error(ErrorCode::ShortFile, "raw frame payload has " + std::to_string(bytes.size() - 16) +
                                          " bytes, expected " + std::to_string(need));
  if (bytes.size() - 16 > need)
    throw Error(ErrorCode::LengthMismatch, "raw frame has " + std::to_string(bytes.size() - 16 - need) +
                                               " trailing bytes");

  Frame f(static_cast<int>(w), static_cast<int>(h), convention);
  const std::uint8_t* p = bytes.data() + 16;
  std::uint64_t clamped = 0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < count; ++i, p += 4) {
      float v = std::bit_cast<float>(get_u32(p));
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "raw frame holds a non-finite sample");
      if (v < 0.0f) {
        v = 0.0f;
        ++clamped;
      } else if (v > 1.0f) {
        v = 1.0f;
        ++clamped;
      }
      f.planes[c][i] = v;
    }
  if (clamped) note_clamped(clamped);
  return f;
}

std::vector<std::uint8_t> write_raw(const Frame& f) {
  std::vector<std::uint8_t> out(16 + f.pixel_count() * 12);
  std::memcpy(out.data(), "ITMF", 4);
  put_u32(out.data() + 4, static_cast<std::uint32_t>(f.width));
  put_u32(out.data() + 8, static_cast<std::uint32_t>(f.height));
  put_u32(out.data() + 12, 3);
  std::uint8_t* p = out.data() + 16;
  for (int c = 0; c < 3; ++c)
    for (float v : f.planes[c]) {
      put_u32(p, std::bit_cast<std::uint32_t>(v));
      p += 4;
    }
  return out;
}

// ---------------------------------------------------------------------------
// PNG (optional)

#ifdef ITMLUT_HAVE_PNG

struct PngIo {
  std::span<const std::uint8_t> in;
  std::size_t pos = 0;
  std::vector<std::uint8_t>* out = nullptr;
  char message[256] = {0};
};

void png_error_cb(png_structp png, png_const_charp msg) {
  auto* io = static_cast<PngIo*>(png_get_error_ptr(png));
  std::snprintf(io->message, sizeof io->message, "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_cb(png_structp, png_const_charp) {}

void png_read_cb(png_structp png, png_bytep data, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  if (io->in.size() - io->pos < length) png_error(png, "PNG stream truncated");
  std::memcpy(data, io->in.data() + io->pos, length);
  io->pos += length;
}

void png_write_cb(png_structp png, png_bytep data, png_size_t length) {
  auto* io = static_cast<PngIo*>(png_get_io_ptr(png));
  io->out->insert(io->out->end(), data, data + length);
}

void png_flush_cb(png_structp) {}

Frame read_png(std::span<const std::uint8_t> bytes, SignalConvention convention) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw Error(ErrorCode::BadMagic, "not a PNG file");
  PngIo io{bytes};
  std::vector<std::uint8_t> raster;
  std::vector<png_bytep> rows;
  png_uint_32 w = 0, h = 0;

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &io, png_error_cb, png_warning_cb);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::Parse, std::string("PNG decode failed: ") + io.message);
  }
  png_set_read_fn(png, &io, png_read_cb);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  if (w == 0 || h == 0 || w > kMaxDimension || h > kMaxDimension) png_error(png, "dimensions out of range");
  png_set_expand(png);
  png_set_expand_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 6) png_error(png, "unexpected row layout");
  raster.resize(static_cast<std::size_t>(w) * h * 6);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = raster.data() + static_cast<std::size_t>(y) * w * 6;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Frame f(static_cast<int>(w), static_cast<int>(h), convention);
  const std::uint8_t* p = raster.data();
  for (std::size_t i = 0; i < f.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c, p += 2) f.planes[c][i] = static_cast<float>(((p[0] << 8) | p[1]) / 65535.0);
  return f;
}

std::vector<std::uint8_t> write_png(const Frame& f) {
  std::vector<std::uint8_t> raster(f.pixel_count() * 6);
  std::uint8_t* q = raster.data();
  for (std::size_t i = 0; i < f.pixel_count(); ++i)
    for (int c = 0; c < 3; ++c) {
      const std::uint16_t v = quantize16(f.planes[c][i]);
      *q++ = static_cast<std::uint8_t>(v >> 8);
      *q++ = static_cast<std::uint8_t>(v & 0xff);
    }
  std::vector<png_bytep> rows(f.height);
  for (int y = 0; y < f.height; ++y) rows[y] = raster.data() + static_cast<std::size_t>(y) * f.width * 6;
  std::vector<std::uint8_t> out;
  PngIo io;
  io.out = &out;

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &io, png_error_cb, png_warning_cb);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::Io, std::string("PNG encode failed: ") + io.message);
  }
  png_set_write_fn(png, &io, png_write_cb, png_flush_cb);
  png_set_IHDR(png, info, static_cast<png_uint_32>(f.width), static_cast<png_uint_32>(f.height), 16,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

#endif

}  // namespace

Frame read_frame(std::span<const std::uint8_t> bytes, FrameFormat format, SignalConvention convention) {
  switch (format) {
    case FrameFormat::Ppm16: return read_ppm(bytes, convention);
    case FrameFormat::RawF32: return read_raw(bytes, convention);
    case FrameFormat::Png16:
#ifdef ITMLUT_HAVE_PNG
      return read_png(bytes, convention);
#else
      throw Error(ErrorCode::InvalidArgument, "built without PNG support");
#endif
  }
  throw Error(ErrorCode::InvalidArgument, "unknown frame format");
}

std::vector<std::uint8_t> write_frame(const Frame& frame, FrameFormat format) {
  switch (format) {
    case FrameFormat::Ppm16: return write_ppm(frame);
    case FrameFormat::RawF32: return write_raw(frame);
    case FrameFormat::Png16:
#ifdef ITMLUT_HAVE_PNG
      return write_png(frame);
#else
      throw Error(ErrorCode::InvalidArgument, "built without PNG support");
#endif
  }
  throw Error(ErrorCode::InvalidArgument, "unknown frame format");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size))
    throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
}

std::filesystem::path sidecar_path(const std::filesystem::path& frame_path) {
  return frame_path.string() + ".json";
}

void write_sidecar(const std::filesystem::path& frame_path, const Frame& frame) {
  const nlohmann::json j = {{"convention", std::string(to_string(frame.convention))},
                            {"width", frame.width},
                            {"height", frame.height}};
  const std::string text = j.dump(2) + "\n";
  write_file(sidecar_path(frame_path), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

SignalConvention read_sidecar(const std::filesystem::path& frame_path, SignalConvention fallback) {
  const auto path = sidecar_path(frame_path);
  if (!std::filesystem::exists(path)) return fallback;
  const auto bytes = read_file(path);
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    return parse_convention(j.at("convention").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, "malformed sidecar '" + path.string() + "': " + e.what());
  }
}

Frame load_frame(const std::filesystem::path& path, SignalConvention fallback) {
  const auto bytes = read_file(path);
  return read_frame(bytes, format_from_path(path), read_sidecar(path, fallback));
}

void save_frame(const std::filesystem::path& path, const Frame& frame) {
  write_file(path, write_frame(frame, format_from_path(path)));
  write_sidecar(path, frame);
}

}  // namespace itm
