#include "itmlut/error.hpp"

namespace itm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::BadMagic: return "bad-magic";
    case ErrorCode::ShortFile: return "short-file";
    case ErrorCode::UnsupportedMaxval: return "unsupported-maxval";
    case ErrorCode::UnsupportedVersion: return "unsupported-version";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::NonFinite: return "non-finite";
    case ErrorCode::BundleCorruption: return "bundle-corruption";
    case ErrorCode::InternalCorruption: return "internal-corruption";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Parse:
    case ErrorCode::BadMagic:
    case ErrorCode::ShortFile:
    case ErrorCode::UnsupportedMaxval:
    case ErrorCode::UnsupportedVersion:
    case ErrorCode::LengthMismatch:
    case ErrorCode::NonFinite:
      return 2;
    case ErrorCode::InvalidArgument:
    case ErrorCode::BundleCorruption:
    case ErrorCode::InternalCorruption:
      return 3;
    case ErrorCode::Io:
      return 4;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + message : message),
      code_(code),
      line_(line) {}

Error Error::with_context(std::string_view context) const {
  Error e(code_, std::string(context) + ": " + what());
  e.line_ = line_;
  return e;
}

}  // namespace itm
