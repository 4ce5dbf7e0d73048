#include "itmlut/cube.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "itmlut/error.hpp"

namespace itm {

namespace {

constexpr std::size_t kMaxCubeSize = 256;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

double parse_number(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw Error(ErrorCode::Parse, "invalid number '" + std::string(tok) + "'", line);
  if (!std::isfinite(v)) throw Error(ErrorCode::Parse, "non-finite value '" + std::string(tok) + "'", line);
  return v;
}

Rgb parse_triple(const std::vector<std::string_view>& tokens, std::size_t first, std::size_t line) {
  if (tokens.size() != first + 3)
    throw Error(ErrorCode::Parse,
                "expected 3 values, found " + std::to_string(tokens.size() - first), line);
  return {parse_number(tokens[first], line), parse_number(tokens[first + 1], line),
          parse_number(tokens[first + 2], line)};
}

// Drops a `#` comment, ignoring `#` inside a quoted TITLE.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    else if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool starts_numeric(std::string_view tok) {
  const char c = tok.front();
  return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

}  // namespace

CubeFile parse_cube(std::string_view text) {
  CubeFile cube;
  bool have_size = false;
  std::size_t expected = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::size_t last_content_line = 0;
  std::size_t domain_line = 0;

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    line = strip_comment(line);
    const auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    last_content_line = line_no;
    const std::string_view key = tokens[0];

    if (starts_numeric(key)) {
      if (!have_size) throw Error(ErrorCode::Parse, "data before LUT_3D_SIZE", line_no);
      const Rgb v = parse_triple(tokens, 0, line_no);
      if (cube.data.size() / 3 >= expected)
        throw Error(ErrorCode::Parse,
                    "too many triples: expected " + std::to_string(expected) + ", found more", line_no);
      cube.data.insert(cube.data.end(), v.begin(), v.end());
    } else if (key == "TITLE") {
      const auto q0 = line.find('"');
      const auto q1 = q0 == std::string_view::npos ? q0 : line.find('"', q0 + 1);
      if (q1 == std::string_view::npos) throw Error(ErrorCode::Parse, "TITLE needs a quoted string", line_no);
      cube.title = std::string(line.substr(q0 + 1, q1 - q0 - 1));
    } else if (key == "LUT_3D_SIZE") {
      if (have_size) throw Error(ErrorCode::Parse, "duplicate LUT_3D_SIZE", line_no);
      if (tokens.size() != 2) throw Error(ErrorCode::Parse, "LUT_3D_SIZE takes one value", line_no);
      std::size_t n = 0;
      const auto [ptr, ec] = std::from_chars(tokens[1].data(), tokens[1].data() + tokens[1].size(), n);
      if (ec != std::errc() || ptr != tokens[1].data() + tokens[1].size() || n < 2 || n > kMaxCubeSize)
        throw Error(ErrorCode::Parse, "LUT_3D_SIZE must be an integer in [2," + std::to_string(kMaxCubeSize) + "]",
                    line_no);
      cube.size = n;
      expected = n * n * n;
      have_size = true;
    } else if (key == "DOMAIN_MIN") {
      cube.domain_min = parse_triple(tokens, 1, line_no);
      domain_line = line_no;
    } else if (key == "DOMAIN_MAX") {
      cube.domain_max = parse_triple(tokens, 1, line_no);
      domain_line = line_no;
    } else if (key == "LUT_3D_INPUT_RANGE") {
      if (tokens.size() != 3) throw Error(ErrorCode::Parse, "LUT_3D_INPUT_RANGE takes two values", line_no);
      const double lo = parse_number(tokens[1], line_no), hi = parse_number(tokens[2], line_no);
      cube.domain_min = {lo, lo, lo};
      cube.domain_max = {hi, hi, hi};
      domain_line = line_no;
    } else if (key == "LUT_1D_SIZE" || key == "LUT_1D_INPUT_RANGE") {
      throw Error(ErrorCode::Parse, "1D LUT sections are not supported", line_no);
    } else {
      throw Error(ErrorCode::Parse, "unknown keyword '" + std::string(key) + "'", line_no);
    }
  }

  // End-of-input diagnostics point at the last non-blank line.
  const std::size_t eof_line = std::max<std::size_t>(last_content_line, 1);
  if (!have_size) throw Error(ErrorCode::Parse, "missing LUT_3D_SIZE", eof_line);
  if (cube.data.size() / 3 != expected)
    throw Error(ErrorCode::Parse,
                "wrong triple count: expected " + std::to_string(expected) + ", found " +
                    std::to_string(cube.data.size() / 3),
                eof_line);
  for (int c = 0; c < 3; ++c)
    if (!(cube.domain_min[c] < cube.domain_max[c]))
      throw Error(ErrorCode::Parse, "DOMAIN_MIN must be below DOMAIN_MAX", domain_line);
  return cube;
}

std::string write_cube(const CubeFile& cube) {
  std::string out;
  out.reserve(64 + cube.data.size() * 10);
  char buf[128];
  if (!cube.title.empty()) out += "TITLE \"" + cube.title + "\"\n";
  std::snprintf(buf, sizeof buf, "LUT_3D_SIZE %zu\n", cube.size);
  out += buf;
  std::snprintf(buf, sizeof buf, "DOMAIN_MIN %.6f %.6f %.6f\n", cube.domain_min[0], cube.domain_min[1],
                cube.domain_min[2]);
  out += buf;
  std::snprintf(buf, sizeof buf, "DOMAIN_MAX %.6f %.6f %.6f\n", cube.domain_max[0], cube.domain_max[1],
                cube.domain_max[2]);
  out += buf;
  for (std::size_t i = 0; i + 2 < cube.data.size(); i += 3) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", cube.data[i] + 0.0, cube.data[i + 1] + 0.0,
                  cube.data[i + 2] + 0.0);
    out += buf;
  }
  return out;
}

CubeFile cube_from_lut(const LutContent& lut, std::string title) {
  CubeFile cube;
  cube.title = std::move(title);
  cube.size = lut.size();
  cube.data.assign(lut.data().begin(), lut.data().end());
  return cube;
}

LutContent resample_cube(const CubeFile& cube, std::size_t n) {
  std::vector<float> values(cube.data.begin(), cube.data.end());
  const Lut3D source(LutContent(cube.size, std::move(values)), VertexGrid::uniform(cube.size));
  const auto axis = uniform_vertices(n);

  LutContent out = LutContent::filled(n, 0.0f);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t r = 0; r < n; ++r) {
        Rgb x{axis[r], axis[g], axis[b]};
        for (int c = 0; c < 3; ++c)
          x[c] = std::clamp((x[c] - cube.domain_min[c]) / (cube.domain_max[c] - cube.domain_min[c]), 0.0, 1.0);
        const Rgb y = lookup(source, x);
        float* e = out.at(r, g, b);
        for (int c = 0; c < 3; ++c) e[c] = static_cast<float>(y[c]);
      }
  return out;
}

}  // namespace itm
