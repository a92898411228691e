#include "sead/error.hpp"

namespace sead {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_line: return "MalformedLine";
    case ErrorCode::duplicate_clip_id: return "DuplicateClipId";
    case ErrorCode::missing_field: return "MissingField";
    case ErrorCode::clip_too_short: return "ClipTooShort";
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::bad_version: return "BadVersion";
    case ErrorCode::frame_count_mismatch: return "FrameCountMismatch";
    case ErrorCode::unexpected_eof: return "UnexpectedEof";
    case ErrorCode::invalid_value: return "InvalidValue";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::invalid_weights: return "InvalidWeights";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::bad_target_dim: return "BadTargetDim";
    case ErrorCode::budget_exceeds_pool: return "BudgetExceedsPool";
    case ErrorCode::insufficient_pool: return "InsufficientPool";
    case ErrorCode::empty_labeled_set: return "EmptyLabeledSet";
    case ErrorCode::unknown_clip: return "UnknownClip";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::bad_config: return "BadConfig";
    case ErrorCode::internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace sead
