#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace zominimax {

enum class ErrorKind {
  kInvalidArgument,
  kDimensionMismatch,
  kNonFinite,
  kMissingOracle,
  kDivergence,
  kUnsupported,
  kIo,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kMissingOracle: return "missing_oracle";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

/// Exception carrying a machine-readable kind plus free-form context
/// (query point, iteration, etc).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::string context = {})
      : std::runtime_error(format(kind, message, context)),
        kind_(kind),
        message_(std::move(message)),
        context_(std::move(context)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }
  const std::string& context() const noexcept { return context_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message,
                            const std::string& context) {
    std::ostringstream os;
    os << "[" << to_string(kind) << "] " << message;
    if (!context.empty()) os << " (" << context << ")";
    return os.str();
  }

  ErrorKind kind_;
  std::string message_;
  std::string context_;
};

inline void require(bool condition, ErrorKind kind, std::string_view message) {
  if (!condition) throw Error(kind, std::string(message));
}

}  // namespace zominimax
