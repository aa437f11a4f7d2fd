#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace provkernel {

// Closed error vocabulary shared by every module. The service maps each code
// to an HTTP status and emits the code string verbatim (see docs/api.md).
enum class ErrorCode {
  BadRequest,
  MalformedSpec,
  CycleIntroduced,
  UnknownNode,
  MultipleHeads,
  UnknownItem,
  UnknownVersion,
  UnknownExecution,
  UnknownAgent,
  MissingInput,
  InvalidTransition,
  NotEligible,
  OutcomeMissing,
  OutcomeUnexpected,
  NotTerminal,
  EmptyExecution,
  StorageError,
  StorageUnavailable,
  AlreadyExists,
  NotFound,
  ImmutableCluster,
  InvalidPath,
  ParseError,
  SchemaViolation,
  InvalidGraph,
  UnknownScript,
  PayloadUnavailable,
  ExecutorError,
  ConfigError,
  BindFailure,
  Internal,
};

std::string_view to_string(ErrorCode code);
bool parse_error_code(std::string_view text, ErrorCode& out);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace provkernel
