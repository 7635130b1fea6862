#include "isac/error.hpp"

namespace isac {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kInfeasibleBracket: return "infeasible bracket";
    case ErrorCode::kInfeasibleSubproblem: return "infeasible subproblem";
    case ErrorCode::kDegenerateSensing: return "degenerate sensing";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kUnknownScheme: return "unknown scheme";
  }
  return "unknown error";
}

}  // namespace isac
