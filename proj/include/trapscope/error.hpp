#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trapscope {

enum class ErrorKind {
  NotHermitian,
  NotUnitary,
  DegenerateSpectrum,
  ZeroCoupling,
  BadDimension,
  OrderingViolation,
  GridMismatch,
  NonConvergence,
  DomainError,
  TooExpensive,
  InsufficientOrder,
  NonRealResult,
  IllConditioned,
  InvalidArgument,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// All recoverable failures in the library. what() starts with the kind name
/// so the command line can surface it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace trapscope
