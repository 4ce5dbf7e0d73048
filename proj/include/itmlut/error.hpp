#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace itm {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  BadMagic,
  ShortFile,
  UnsupportedMaxval,
  UnsupportedVersion,
  LengthMismatch,
  NonFinite,
  BundleCorruption,
  InternalCorruption,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for a failure class: 2 parse, 3 validation, 4 I/O.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  /// 1-based source line for text-format diagnostics.
  std::optional<std::size_t> line() const noexcept { return line_; }

  /// Same error, message prefixed with `context: `.
  Error with_context(std::string_view context) const;

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace itm
