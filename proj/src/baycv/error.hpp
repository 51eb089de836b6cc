#pragma once

#include <stdexcept>
#include <string>

namespace baycv {

enum class ErrorCode {
  InvalidArgument,
  ShapeMismatch,
  TokenMismatch,
  NoOovTokens,
  TooFewItems,
  IndexOutOfRange,
  CommandFailed,
  OutputUnreadable,
  NoSharedKeys,
  ScoreMismatch,
  TooFewDatasets,
  DimensionMismatch,
  MissingPair,
  Parse,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace baycv
