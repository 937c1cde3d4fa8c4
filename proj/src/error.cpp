#include "stconv/error.hpp"

namespace stconv {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_shape: return "invalid-shape";
    case ErrorCode::invalid_range: return "invalid-range";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::geometry: return "geometry";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::label: return "label";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::stratification: return "stratification";
    case ErrorCode::insufficient_data: return "insufficient-data";
  }
  return "unknown";
}

}  // namespace stconv
