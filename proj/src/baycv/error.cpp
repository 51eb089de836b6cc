#include "baycv/error.hpp"

namespace baycv {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TokenMismatch: return "TokenMismatch";
    case ErrorCode::NoOovTokens: return "NoOovTokens";
    case ErrorCode::TooFewItems: return "TooFewItems";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::CommandFailed: return "CommandFailed";
    case ErrorCode::OutputUnreadable: return "OutputUnreadable";
    case ErrorCode::NoSharedKeys: return "NoSharedKeys";
    case ErrorCode::ScoreMismatch: return "ScoreMismatch";
    case ErrorCode::TooFewDatasets: return "TooFewDatasets";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MissingPair: return "MissingPair";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace baycv
