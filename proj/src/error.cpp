#include "sflow/error.hpp"

namespace sflow {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io_failure: return "IOFailure";
    case ErrorCode::unsupported_format: return "UnsupportedFormat";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::invalid_ratio: return "InvalidRatio";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::too_small: return "TooSmall";
    case ErrorCode::bad_magic: return "BadMagic";
    case ErrorCode::solver_divergence: return "SolverDivergence";
    case ErrorCode::isolated_hole: return "IsolatedHole";
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::empty_valid_set: return "EmptyValidSet";
    case ErrorCode::score_out_of_range: return "ScoreOutOfRange";
    case ErrorCode::no_valid_source: return "NoValidSource";
    case ErrorCode::divergence: return "Divergence";
    case ErrorCode::invalid_config: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace sflow
