#pragma once

#include <stdexcept>
#include <string>

namespace sead {

enum class ErrorCode {
  malformed_line,
  duplicate_clip_id,
  missing_field,
  clip_too_short,
  bad_magic,
  bad_version,
  frame_count_mismatch,
  unexpected_eof,
  invalid_value,
  dimension_mismatch,
  invalid_weights,
  non_convergence,
  bad_target_dim,
  budget_exceeds_pool,
  insufficient_pool,
  empty_labeled_set,
  unknown_clip,
  io_error,
  bad_config,
  internal,
};

const char* to_string(ErrorCode code);

// Single exception type for all engine failures; code() lets callers
// (tests, the CLI exit-code mapping) dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sead
