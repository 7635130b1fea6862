#pragma once

#include <stdexcept>
#include <string>

namespace isac {

enum class ErrorCode {
  kInvalidInput = 1,
  kInfeasibleBracket,
  kInfeasibleSubproblem,
  kDegenerateSensing,
  kConfig,
  kIo,
  kUnknownScheme,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; the C API maps `code()` onto status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::kInvalidInput, what);
}

}  // namespace isac
