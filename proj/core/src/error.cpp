#include "fairhil/error.hpp"

namespace fairhil {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kStructural: return "structural_error";
    case ErrorCode::kSchema: return "schema_error";
    case ErrorCode::kEmptyDataset: return "empty_dataset";
    case ErrorCode::kState: return "state_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "internal_error";
}

Error::Error(ErrorCode code, const std::string& message, std::string detail)
    : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

}  // namespace fairhil
