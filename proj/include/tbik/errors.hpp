#pragma once

#include <stdexcept>
#include <string>

namespace tbik {

enum class ErrorCode {
  BadDimension,
  ShapeMismatch,
  BadMagic,
  Truncated,
  UnknownDtype,
  PlanInfeasible,
  ShardError,
  BadWorldSize,
  CollectiveMismatch,
  BadArgument,
  Io,
};

class TbikError : public std::runtime_error {
 public:
  TbikError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw TbikError(code, what);
}

}  // namespace tbik
