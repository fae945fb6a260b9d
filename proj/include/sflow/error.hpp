#pragma once

#include <stdexcept>
#include <string>

namespace sflow {

enum class ErrorCode {
  io_failure,
  unsupported_format,
  dimension_mismatch,
  invalid_ratio,
  invalid_argument,
  too_small,
  bad_magic,
  solver_divergence,
  isolated_hole,
  zero_vector,
  empty_valid_set,
  score_out_of_range,
  no_valid_source,
  divergence,
  invalid_config,
};

const char* to_string(ErrorCode code) noexcept;

// All library failures are reported through this type; callers switch on
// code() when they need to map failures (HTTP status, exit code).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sflow
